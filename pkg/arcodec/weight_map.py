#!/usr/bin/env python3
"""
Residual-guided weight map: w = sigmoid(mean_c |x - x_bar|).
"""

from dataclasses import dataclass

import torch

from core.errors import ContractError
from core.frame import Frame, check_congruent


@dataclass(frozen=True)
class WeightMap:
    """weights: [1, H, W] in (0, 1); 0.5 wherever the frames agree."""
    weights: torch.Tensor


def weight_map_tensor(x: torch.Tensor, x_bar: torch.Tensor, mode: str = "sigmoid") -> torch.Tensor:
    """Batched weights [B, 1, H, W] from [B, 3, H, W] inputs.

    mode "linear" drops the sigmoid, "none" disables masking (all ones).
    """
    if x.shape != x_bar.shape:
        raise ContractError(f"weight map inputs differ: {tuple(x.shape)} vs {tuple(x_bar.shape)}")
    residual = (x - x_bar).abs().mean(dim=-3, keepdim=True)
    if mode == "sigmoid":
        return torch.sigmoid(residual)
    if mode == "linear":
        return residual
    if mode == "none":
        return torch.ones_like(residual)
    raise ContractError(f"unknown mask mode '{mode}'")


def compute_weight_map(x_t: Frame, x_bar: Frame) -> WeightMap:
    check_congruent(x_t.pixels, x_bar.pixels)
    return WeightMap(weight_map_tensor(x_t.pixels, x_bar.pixels))
