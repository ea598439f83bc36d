#!/usr/bin/env python3
"""
Multi-scale features from the quantized latent: bilinear upsampling to
1/16, 1/8, 1/4 and 1/2 of the frame size followed by a 1x1 convolution per
scale. A constant latent therefore yields spatially constant features.
"""

from dataclasses import dataclass
from typing import List

import torch
import torch.nn as nn
import torch.nn.functional as F

from core.errors import ContractError

SCALE_FACTORS = (1, 2, 4, 8)   # relative to the latent: 1/16, 1/8, 1/4, 1/2 of the frame


@dataclass
class MultiScaleFeatures:
    """Four [B, F, h*s, w*s] maps ordered coarse to fine."""
    scales: List[torch.Tensor]

    def __post_init__(self):
        if len(self.scales) != len(SCALE_FACTORS):
            raise ContractError(f"expected {len(SCALE_FACTORS)} scales, got {len(self.scales)}")

    @property
    def finest(self) -> torch.Tensor:
        return self.scales[-1]


class MultiScaleExtractor(nn.Module):
    """mode "full" extracts every scale; "ends" only the coarsest and finest (others are zero)."""

    def __init__(self, in_channels: int, out_channels: int, mode: str = "full"):
        super().__init__()
        if mode not in ("full", "ends"):
            raise ContractError(f"unknown multiscale mode '{mode}'")
        self.mode = mode
        self.out_channels = out_channels
        self.active = tuple(range(len(SCALE_FACTORS))) if mode == "full" else (0, len(SCALE_FACTORS) - 1)
        self.projections = nn.ModuleDict({str(i): nn.Conv2d(in_channels, out_channels, 1) for i in self.active})

    def forward(self, latent: torch.Tensor) -> MultiScaleFeatures:
        b, _, h, w = latent.shape
        scales = []
        for i, s in enumerate(SCALE_FACTORS):
            if i not in self.active:
                scales.append(latent.new_zeros(b, self.out_channels, h * s, w * s))
                continue
            up = latent if s == 1 else F.interpolate(latent, scale_factor=float(s), mode="bilinear",
                                                      align_corners=False)
            scales.append(self.projections[str(i)](up))
        return MultiScaleFeatures(scales)


def extract_multiscale(y_hat: torch.Tensor, extractor: MultiScaleExtractor) -> MultiScaleFeatures:
    """Features for an unbatched latent [C, h, w] (batched [1, F, ...] maps)."""
    with torch.no_grad():
        return extractor(y_hat.unsqueeze(0) if y_hat.dim() == 3 else y_hat)
