#!/usr/bin/env python3
"""
Interpolation loss used to pre-train backends: pixel L1 plus soft census.
"""

import torch
import torch.nn.functional as F


def _gray(x: torch.Tensor) -> torch.Tensor:
    return (0.299 * x[:, 0:1] + 0.587 * x[:, 1:2] + 0.114 * x[:, 2:3])


def census_transform(x: torch.Tensor, patch: int = 7) -> torch.Tensor:
    """Soft ternary census signature [B, patch*patch, H, W] of the luma channel."""
    g = _gray(x) * 255.0
    pad = patch // 2
    neigh = F.unfold(F.pad(g, (pad, pad, pad, pad), mode="replicate"), patch)
    neigh = neigh.view(x.shape[0], patch * patch, *x.shape[-2:])
    diff = neigh - g
    return diff / torch.sqrt(0.81 + diff * diff)


def census_loss(pred: torch.Tensor, target: torch.Tensor, patch: int = 7) -> torch.Tensor:
    d = census_transform(pred, patch) - census_transform(target, patch)
    d2 = d * d
    return (d2 / (0.1 + d2)).mean()


def interpolation_loss(pred: torch.Tensor, target: torch.Tensor, patch: int = 7,
                       census_weight: float = 1.0) -> torch.Tensor:
    return (pred - target).abs().mean() + census_weight * census_loss(pred, target, patch)
