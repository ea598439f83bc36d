#!/usr/bin/env python3
"""
Flow and occlusion containers passed between the interpolator and warping.
"""

from dataclasses import dataclass
from typing import Optional

import torch

from core.errors import ContractError


@dataclass(frozen=True)
class FlowField:
    """vectors: [2, H, W] pixel displacements (dx, dy) from the target grid into a reference."""
    vectors: torch.Tensor

    def __post_init__(self):
        v = self.vectors
        if v.dim() != 3 or v.shape[0] != 2:
            raise ContractError(f"flow must be [2, H, W], got {tuple(v.shape)}")
        if not torch.isfinite(v).all():
            raise ContractError("flow contains non-finite values")

    @classmethod
    def zeros(cls, height: int, width: int) -> "FlowField":
        return cls(torch.zeros(2, height, width))

    @classmethod
    def constant(cls, dx: float, dy: float, height: int, width: int) -> "FlowField":
        v = torch.empty(2, height, width)
        v[0].fill_(dx)
        v[1].fill_(dy)
        return cls(v)

    def magnitude(self) -> torch.Tensor:
        return torch.linalg.vector_norm(self.vectors, dim=0)


@dataclass(frozen=True)
class OcclusionMap:
    """Fusion weights in [0, 1] for the previous reference.

    ``complement`` holds 1 - weights as computed once; swapping references uses
    ``flipped()`` so that the fused result is reproduced exactly.
    """
    weights: torch.Tensor
    complement: Optional[torch.Tensor] = None

    def __post_init__(self):
        w = self.weights
        if w.dim() != 3 or w.shape[0] != 1:
            raise ContractError(f"occlusion map must be [1, H, W], got {tuple(w.shape)}")
        if not torch.isfinite(w).all() or float(w.min()) < 0.0 or float(w.max()) > 1.0:
            raise ContractError("occlusion weights must lie in [0, 1]")
        if self.complement is None:
            object.__setattr__(self, "complement", 1.0 - w)
        elif self.complement.shape != w.shape:
            raise ContractError("occlusion complement shape differs from weights")

    @classmethod
    def constant(cls, value: float, height: int, width: int) -> "OcclusionMap":
        return cls(torch.full((1, height, width), float(value)))

    def flipped(self) -> "OcclusionMap":
        return OcclusionMap(weights=self.complement, complement=self.weights)
