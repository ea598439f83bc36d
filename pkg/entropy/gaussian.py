#!/usr/bin/env python3
"""
Mean-scale Gaussian conditional likelihoods and rate estimates.
"""

import math
from dataclasses import dataclass

import torch

from core.errors import ContractError

_SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass
class RateEstimate:
    """bits: total over the batch; nll: per-element -log2 p (same shape as the latent)."""
    bits: torch.Tensor
    nll: torch.Tensor

    def per_sample(self) -> torch.Tensor:
        return self.nll.flatten(1).sum(1)

    @classmethod
    def from_likelihoods(cls, likelihoods: torch.Tensor) -> "RateEstimate":
        nll = -torch.log2(likelihoods)
        return cls(bits=nll.sum(), nll=nll)

    def __add__(self, other: "RateEstimate") -> "RateEstimate":
        return RateEstimate(bits=self.bits + other.bits, nll=torch.cat([self.nll.flatten(1), other.nll.flatten(1)], 1))


def standard_normal_cdf(x: torch.Tensor) -> torch.Tensor:
    return 0.5 * torch.erfc(-x * _SQRT1_2)


def gaussian_likelihood(values: torch.Tensor, means: torch.Tensor, scales: torch.Tensor,
                        likelihood_bound: float = 1e-9) -> torch.Tensor:
    """P(value) = Phi((v + 0.5 - mu) / sigma) - Phi((v - 0.5 - mu) / sigma)."""
    if not (torch.isfinite(means).all() and torch.isfinite(scales).all()):
        raise ContractError("gaussian parameters must be finite")
    centred = (values - means).abs()
    upper = standard_normal_cdf((0.5 - centred) / scales)
    lower = standard_normal_cdf((-0.5 - centred) / scales)
    return (upper - lower).clamp_min(likelihood_bound)
