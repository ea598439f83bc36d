#!/usr/bin/env python3
"""
Rate-distortion objective averaged over the B targets of a sample.

    L = (1/T) * sum_t (R_t + lambda * D_t)

R_t in bits per pixel, D_t the MSE on [0, 1] pixels or 1 - MS-SSIM.
"""

from dataclasses import dataclass
from typing import Sequence

import torch

from core.config import DISTORTIONS
from core.errors import ConfigurationError, TrainingAbort
from metrics_eval.quality import ms_ssim_tensor


@dataclass
class RDTerms:
    loss: torch.Tensor
    rate_bpp: torch.Tensor
    distortion: torch.Tensor


def distortion(x: torch.Tensor, x_hat: torch.Tensor, kind: str = "mse") -> torch.Tensor:
    """Per-sample distortion of batches [B, 3, H, W]."""
    if kind == "mse":
        return ((x - x_hat) ** 2).flatten(1).mean(1)
    if kind == "ms-ssim":
        return 1.0 - ms_ssim_tensor(x, x_hat)
    raise ConfigurationError(f"unknown distortion '{kind}', expected one of {DISTORTIONS}")


def _finite(name: str, t: torch.Tensor) -> None:
    if not torch.isfinite(t).all():
        raise TrainingAbort(f"non-finite {name} in rate-distortion loss")


def rd_loss(targets: Sequence[torch.Tensor], recons: Sequence[torch.Tensor], rates_bpp: Sequence[torch.Tensor],
            lam: float, kind: str = "mse") -> RDTerms:
    """``rates_bpp`` holds one (per-sample or scalar) bpp tensor per target."""
    if not (len(targets) == len(recons) == len(rates_bpp)) or not targets:
        raise ConfigurationError(
            f"need matching targets/recons/rates, got {len(targets)}/{len(recons)}/{len(rates_bpp)}")
    rate_total, dist_total = 0.0, 0.0
    for x, x_hat, r in zip(targets, recons, rates_bpp):
        _finite("target", x)
        _finite("reconstruction", x_hat)
        _finite("rate", torch.as_tensor(r))
        rate_total = rate_total + torch.as_tensor(r, dtype=x.dtype).mean()
        dist_total = dist_total + distortion(x, x_hat, kind).mean()
    t = float(len(targets))
    rate, dist = rate_total / t, dist_total / t
    loss = rate + lam * dist
    _finite("loss", loss)
    return RDTerms(loss=loss, rate_bpp=rate, distortion=dist)
