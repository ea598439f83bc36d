#!/usr/bin/env python3
"""
Frame quality and rate metrics: PSNR on RGB, MS-SSIM, bits per pixel.
"""

import logging
import math
from typing import Union

import torch
import torch.nn.functional as F
from pytorch_msssim import ms_ssim as _ms_ssim5

from core.errors import ContractError
from core.frame import Frame, check_congruent

logger = logging.getLogger(__name__)

PSNR_CAP_DB = 100.0
MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
WINDOW = 11
# smallest reported MS-SSIM; RDPoint requires a positive value
MS_SSIM_FLOOR = 1e-6
SIGMA = 1.5
_C1 = 0.01 ** 2
_C2 = 0.03 ** 2

FrameLike = Union[Frame, torch.Tensor]


def _pixels(x: FrameLike) -> torch.Tensor:
    t = x.pixels if isinstance(x, Frame) else x
    return t if t.dim() == 4 else t.unsqueeze(0)


def psnr(x: FrameLike, x_hat: FrameLike, cap: float = PSNR_CAP_DB) -> float:
    a, b = _pixels(x), _pixels(x_hat)
    if a.shape != b.shape:
        raise ContractError(f"psnr needs equal shapes, got {tuple(a.shape)} vs {tuple(b.shape)}")
    mse = float(torch.mean((a.double() - b.double()) ** 2))
    if mse <= 0.0:
        return cap
    return min(cap, -10.0 * math.log10(mse))


def ms_ssim_levels(height: int, width: int) -> int:
    side = min(height, width)
    if side < WINDOW:
        return 0
    return min(len(MS_SSIM_WEIGHTS), 1 + int(math.floor(math.log2(side / WINDOW))))


def _gaussian_window(channels: int, dtype, device) -> torch.Tensor:
    coords = torch.arange(WINDOW, dtype=dtype, device=device) - WINDOW // 2
    g = torch.exp(-(coords ** 2) / (2 * SIGMA ** 2))
    g = g / g.sum()
    return (g[:, None] * g[None, :]).expand(channels, 1, WINDOW, WINDOW).contiguous()


def _ssim_cs(a: torch.Tensor, b: torch.Tensor, win: torch.Tensor):
    c = a.shape[1]
    mu_a = F.conv2d(a, win, groups=c)
    mu_b = F.conv2d(b, win, groups=c)
    var_a = F.conv2d(a * a, win, groups=c) - mu_a ** 2
    var_b = F.conv2d(b * b, win, groups=c) - mu_b ** 2
    cov = F.conv2d(a * b, win, groups=c) - mu_a * mu_b
    cs = (2 * cov + _C2) / (var_a + var_b + _C2)
    ssim = (2 * mu_a * mu_b + _C1) / (mu_a ** 2 + mu_b ** 2 + _C1) * cs
    return ssim.flatten(2).mean(-1), cs.flatten(2).mean(-1)


def _ms_ssim_truncated(a: torch.Tensor, b: torch.Tensor, levels: int) -> torch.Tensor:
    weights = torch.tensor(MS_SSIM_WEIGHTS[:levels], dtype=a.dtype, device=a.device)
    weights = weights / weights.sum()
    win = _gaussian_window(a.shape[1], a.dtype, a.device)
    terms = []
    for level in range(levels):
        ssim, cs = _ssim_cs(a, b, win)
        if level < levels - 1:
            terms.append(torch.relu(cs))
            a, b = F.avg_pool2d(a, 2), F.avg_pool2d(b, 2)
    terms.append(torch.relu(ssim))
    stacked = torch.stack(terms, dim=0)                     # [levels, B, C]
    value = torch.prod(stacked ** weights[:, None, None], dim=0)
    return value.mean(dim=1)


def ms_ssim_tensor(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Differentiable per-sample MS-SSIM of batches [B, 3, H, W] in [0, 1]."""
    check_congruent(a, b)
    levels = ms_ssim_levels(*a.shape[-2:])
    if levels == 0:
        raise ContractError(f"frames {tuple(a.shape[-2:])} too small for an {WINDOW}x{WINDOW} window")
    if levels == len(MS_SSIM_WEIGHTS):
        return _ms_ssim5(a, b, data_range=1.0, size_average=False, win_size=WINDOW)
    logger.warning("frame %s too small for 5-scale MS-SSIM, using %d scales", tuple(a.shape[-2:]), levels)
    return _ms_ssim_truncated(a, b, levels)


def ms_ssim(x: FrameLike, x_hat: FrameLike) -> float:
    """Mean MS-SSIM in [MS_SSIM_FLOOR, 1]."""
    a, b = _pixels(x).double(), _pixels(x_hat).double()
    if a.shape != b.shape:
        raise ContractError(f"ms_ssim needs equal shapes, got {tuple(a.shape)} vs {tuple(b.shape)}")
    if torch.equal(a, b):
        return 1.0
    with torch.no_grad():
        return float(ms_ssim_tensor(a, b).mean().clamp(MS_SSIM_FLOOR, 1.0))


def bpp(bits: float, height: int, width: int, num_frames: int = 1) -> float:
    if height <= 0 or width <= 0 or num_frames <= 0:
        raise ContractError(f"bpp needs a positive pixel count, got {num_frames}x{height}x{width}")
    return float(bits) / float(num_frames * height * width)
