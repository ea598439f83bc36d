#!/usr/bin/env python3
"""
Learned per-channel factorized prior for the hyper latent.

The cumulative density of each channel is a small monotone network
(softplus-constrained matrices, biases and tanh gates); likelihoods are
differences of its sigmoid at y +- 0.5.
"""

import math
from typing import Tuple

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from .symbol_model import TableSymbolModel, escape_mass_for


class FactorizedPrior(nn.Module):
    def __init__(self, channels: int, filters: Tuple[int, ...] = (3, 3, 3),
                 init_scale: float = 10.0, likelihood_bound: float = 1e-9):
        super().__init__()
        self.channels = channels
        self.likelihood_bound = likelihood_bound
        dims = (1,) + tuple(filters) + (1,)
        scale = init_scale ** (1.0 / (len(dims) - 1))
        self.matrices = nn.ParameterList()
        self.biases = nn.ParameterList()
        self.factors = nn.ParameterList()
        for i in range(len(dims) - 1):
            init = math.log(math.expm1(1.0 / scale / dims[i + 1]))
            self.matrices.append(nn.Parameter(torch.full((channels, dims[i + 1], dims[i]), init)))
            self.biases.append(nn.Parameter(torch.empty(channels, dims[i + 1], 1).uniform_(-0.5, 0.5)))
            if i < len(dims) - 2:
                self.factors.append(nn.Parameter(torch.zeros(channels, dims[i + 1], 1)))

    def logits_cumulative(self, inputs: torch.Tensor) -> torch.Tensor:
        """inputs [C, 1, N] -> logits of the cumulative [C, 1, N]."""
        logits = inputs
        for i, matrix in enumerate(self.matrices):
            logits = torch.matmul(F.softplus(matrix), logits) + self.biases[i]
            if i < len(self.factors):
                logits = logits + torch.tanh(self.factors[i]) * torch.tanh(logits)
        return logits

    def likelihood(self, values: torch.Tensor) -> torch.Tensor:
        """Probability of each (integer or noisy) value of a [B, C, H, W] tensor."""
        b, c, h, w = values.shape
        v = values.permute(1, 0, 2, 3).reshape(c, 1, -1)
        lower = self.logits_cumulative(v - 0.5)
        upper = self.logits_cumulative(v + 0.5)
        sign = -torch.sign(lower + upper).detach()
        lik = (torch.sigmoid(sign * upper) - torch.sigmoid(sign * lower)).abs()
        lik = lik.reshape(c, b, h, w).permute(1, 0, 2, 3)
        return lik.clamp_min(self.likelihood_bound)

    @torch.no_grad()
    def symbol_model(self, support: int, escape_mode: str = "fixed") -> TableSymbolModel:
        """One table per channel over values [-support, support] plus an escape bin."""
        device = self.matrices[0].device
        edges = torch.arange(-support, support + 2, dtype=self.matrices[0].dtype, device=device) - 0.5
        edges = edges.view(1, 1, -1).expand(self.channels, 1, -1)
        cum = torch.sigmoid(self.logits_cumulative(edges)).squeeze(1).double().cpu().numpy()
        pmf = np.diff(cum, axis=1)
        offsets = np.full(self.channels, -support, dtype=np.int64)
        return TableSymbolModel.from_pmf(pmf, offsets, escape=True,
                                         escape_mass=escape_mass_for(escape_mode, support))
