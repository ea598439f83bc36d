#!/usr/bin/env python3
"""
Residual-guided masking encoder.

The weight map is broadcast over the 6-channel concatenation [x_t, x_bar]
and the product is analysed by four stride-2 convolutions down to 1/16
resolution.
"""

from typing import Optional

import torch
import torch.nn as nn

from core.errors import ContractError
from core.frame import Frame, check_congruent
from .weight_map import WeightMap


class RGMEncoder(nn.Module):
    def __init__(self, channels: int = 64, latent_channels: int = 96):
        super().__init__()
        self.analysis = nn.Sequential(
            nn.Conv2d(6, channels, 5, 2, 2), nn.LeakyReLU(0.1),
            nn.Conv2d(channels, channels, 5, 2, 2), nn.LeakyReLU(0.1),
            nn.Conv2d(channels, channels, 5, 2, 2), nn.LeakyReLU(0.1),
            nn.Conv2d(channels, latent_channels, 5, 2, 2),
        )

    def forward(self, x: torch.Tensor, x_bar: torch.Tensor, weights: torch.Tensor) -> torch.Tensor:
        if x.shape != x_bar.shape or weights.shape[-2:] != x.shape[-2:] or weights.shape[-3] != 1:
            raise ContractError(f"encoder inputs not congruent: {tuple(x.shape)}, {tuple(x_bar.shape)}, "
                                f"{tuple(weights.shape)}")
        if x.shape[-2] % 16 or x.shape[-1] % 16:
            raise ContractError(f"frame size {tuple(x.shape[-2:])} must be a multiple of 16")
        masked = weights * torch.cat([x, x_bar], dim=-3)
        return self.analysis(masked)


def rgme_encode(x_t: Frame, x_bar: Frame, w: WeightMap, encoder: RGMEncoder) -> torch.Tensor:
    """Real latent y_t [C, H/16, W/16]."""
    check_congruent(x_t.pixels, x_bar.pixels)
    with torch.no_grad():
        return encoder(x_t.batch(), x_bar.batch(), w.weights.unsqueeze(0))[0]
