#!/usr/bin/env python3
"""
Frame: one raw or decoded RGB picture with its index and coding type.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple

import torch

from .errors import ContractError


class CodingType(str, Enum):
    I = "I"
    P = "P"
    B = "B"

    @property
    def code(self) -> int:
        """Single-byte tag used in bitstream chunks."""
        return {"I": 0, "P": 1, "B": 2}[self.value]

    @classmethod
    def from_code(cls, code: int) -> "CodingType":
        for ct in cls:
            if ct.code == code:
                return ct
        raise ValueError(f"unknown coding type code {code}")


@dataclass(frozen=True)
class Frame:
    """Planar RGB picture.

    pixels: float32 tensor [3, H, W] with values in [0, 1]
    original_size: (H0, W0) before padding; defaults to the current size
    """
    pixels: torch.Tensor
    index: int = 0
    coding_type: Optional[CodingType] = None
    original_size: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        px = self.pixels
        if not isinstance(px, torch.Tensor) or px.dim() != 3 or px.shape[0] != 3:
            shape = tuple(px.shape) if hasattr(px, "shape") else type(px).__name__
            raise ContractError(f"frame pixels must be a [3, H, W] tensor, got {shape}")
        if self.index < 0:
            raise ContractError(f"frame index must be non-negative, got {self.index}")
        if self.original_size is None:
            object.__setattr__(self, "original_size", (int(px.shape[1]), int(px.shape[2])))
        h0, w0 = self.original_size
        if h0 > px.shape[1] or w0 > px.shape[2]:
            raise ContractError(
                f"original_size {self.original_size} exceeds pixel size {tuple(px.shape[1:])}")

    @property
    def height(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[2])

    @property
    def size(self) -> Tuple[int, int]:
        return (self.height, self.width)

    def with_pixels(self, pixels: torch.Tensor) -> "Frame":
        return replace(self, pixels=pixels)

    def with_type(self, coding_type: CodingType) -> "Frame":
        return replace(self, coding_type=coding_type)

    def batch(self) -> torch.Tensor:
        """Pixels as a [1, 3, H, W] tensor for network input."""
        return self.pixels.unsqueeze(0)

    def check_range(self) -> None:
        if not torch.isfinite(self.pixels).all():
            raise ContractError(f"frame {self.index} has non-finite pixels")
        lo, hi = float(self.pixels.min()), float(self.pixels.max())
        if lo < 0.0 or hi > 1.0:
            raise ContractError(f"frame {self.index} pixels outside [0,1]: [{lo}, {hi}]")


def check_congruent(a: torch.Tensor, b: torch.Tensor, what: str = "frames") -> None:
    """Raise ContractError unless the trailing spatial dims of a and b agree."""
    if a.shape[-2:] != b.shape[-2:]:
        raise ContractError(
            f"{what} not spatially congruent: {tuple(a.shape)} vs {tuple(b.shape)}")
