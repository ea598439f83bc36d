#!/usr/bin/env python3
"""
BT.709 limited-range YUV <-> RGB conversion on 8-bit planes.
"""

from typing import Tuple

import numpy as np
import torch
import torch.nn.functional as F

from core.errors import ConfigurationError, MalformedInputError
from core.frame import Frame

# BT.709: Kr = 0.2126, Kb = 0.0722
KR, KB = 0.2126, 0.0722
KG = 1.0 - KR - KB
Y_OFFSET, Y_RANGE = 16.0, 219.0
C_OFFSET, C_RANGE = 128.0, 224.0


def _check_depth(bit_depth: int) -> None:
    if bit_depth != 8:
        raise ConfigurationError(f"only 8-bit YUV is supported, got bit_depth={bit_depth}")


def chroma_shape(height: int, width: int, subsampling: str) -> Tuple[int, int]:
    if subsampling == "420":
        return ((height + 1) // 2, (width + 1) // 2)
    return (height, width)


def yuv_to_rgb(y: np.ndarray, u: np.ndarray, v: np.ndarray, bit_depth: int = 8, index: int = 0) -> Frame:
    """Convert Y, U, V planes (4:2:0 or 4:4:4) to an RGB Frame in [0, 1]."""
    _check_depth(bit_depth)
    y, u, v = (np.asarray(p) for p in (y, u, v))
    if y.ndim != 2 or u.ndim != 2 or v.ndim != 2:
        raise MalformedInputError(f"planes must be 2-D, got {y.shape}, {u.shape}, {v.shape}")
    if u.shape != v.shape:
        raise MalformedInputError(f"U {u.shape} and V {v.shape} planes differ")
    h, w = y.shape
    if u.shape == (h, w):
        subsampling = "444"
    elif u.shape == chroma_shape(h, w, "420"):
        subsampling = "420"
    else:
        raise MalformedInputError(f"chroma {u.shape} inconsistent with luma {y.shape} for 4:2:0 or 4:4:4")

    luma = (torch.from_numpy(y.astype(np.float32)) - Y_OFFSET) / Y_RANGE
    chroma = torch.from_numpy(np.stack([u, v]).astype(np.float32))
    chroma = (chroma - C_OFFSET) / C_RANGE
    if subsampling == "420":
        chroma = F.interpolate(chroma.unsqueeze(0), size=(h, w), mode="bilinear",
                               align_corners=False).squeeze(0)
    cb, cr = chroma[0], chroma[1]
    r = luma + 2.0 * (1.0 - KR) * cr
    b = luma + 2.0 * (1.0 - KB) * cb
    g = luma - (2.0 * KB * (1.0 - KB) / KG) * cb - (2.0 * KR * (1.0 - KR) / KG) * cr
    rgb = torch.stack([r, g, b]).clamp_(0.0, 1.0)
    return Frame(pixels=rgb.contiguous(), index=index)


def rgb_to_yuv(frame: Frame, subsampling: str = "420") -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse conversion to uint8 planes; 4:2:0 chroma is a 2x2 box average."""
    if subsampling not in ("420", "444"):
        raise ConfigurationError(f"unsupported chroma subsampling '{subsampling}'")
    r, g, b = frame.pixels.to(torch.float32)
    luma = KR * r + KG * g + KB * b
    cb = (b - luma) / (2.0 * (1.0 - KB))
    cr = (r - luma) / (2.0 * (1.0 - KR))
    y = luma * Y_RANGE + Y_OFFSET
    chroma = torch.stack([cb, cr]) * C_RANGE + C_OFFSET
    if subsampling == "420":
        h, w = frame.size
        ph, pw = h % 2, w % 2
        padded = F.pad(chroma.unsqueeze(0), (0, pw, 0, ph), mode="replicate")
        chroma = F.avg_pool2d(padded, 2).squeeze(0)

    def to_u8(t: torch.Tensor) -> np.ndarray:
        return t.round().clamp(0, 255).to(torch.uint8).numpy()

    return to_u8(y), to_u8(chroma[0]), to_u8(chroma[1])
