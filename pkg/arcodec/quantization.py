#!/usr/bin/env python3
"""
Latent quantization: rounding at inference, additive uniform noise in training.
"""

from typing import Optional

import torch

from core.errors import ContractError

MODES = ("train", "inference")


def round_half_away(y: torch.Tensor) -> torch.Tensor:
    """Round to nearest integer, ties away from zero."""
    return torch.sign(y) * torch.floor(y.abs() + 0.5)


def uniform_noise(y: torch.Tensor, generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """Noise in [-0.5, 0.5) shaped like y."""
    return torch.rand(y.shape, generator=generator, dtype=y.dtype, device=y.device) - 0.5


def quantize(y: torch.Tensor, mode: str = "inference", noise: Optional[torch.Tensor] = None,
             generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """Integer-valued latent (inference) or differentiable noisy surrogate (train).

    A fixed ``noise`` tensor makes the train-mode surrogate deterministic.
    """
    if mode not in MODES:
        raise ContractError(f"unknown quantization mode '{mode}', expected one of {MODES}")
    if not torch.isfinite(y).all():
        raise ContractError("cannot quantize non-finite latent values")
    if mode == "inference":
        return round_half_away(y)
    if noise is None:
        noise = uniform_noise(y, generator)
    elif noise.shape != y.shape:
        raise ContractError(f"noise shape {tuple(noise.shape)} differs from latent {tuple(y.shape)}")
    return y + noise
