#!/usr/bin/env python3
"""
Conditional spatio-temporal contextual decoder.

latent (+ prior latents) -> multi-scale features -> grid fusion at 1/2
resolution -> refinement conditioned on the finest latent feature and the
interpolated frame -> channel-attention layers at full resolution conditioned
on the interpolated frame -> residual added to the interpolated frame.
"""

from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from core.config import CodecConfig
from core.errors import ContractError
from core.frame import Frame
from .attention import TransformerLayer
from .gridnet import GridFusion
from .multiscale import MultiScaleExtractor
from .prior_buffer import PriorBuffer


class CSCDecoder(nn.Module):
    def __init__(self, config: Optional[CodecConfig] = None):
        super().__init__()
        self.config = config or CodecConfig()
        cfg = self.config
        gch = cfg.grid_channels
        self.latent_channels = cfg.latent_channels
        self.prior_channels = cfg.latent_channels * cfg.prior_k
        self.extractor = MultiScaleExtractor(cfg.latent_channels + self.prior_channels, gch, cfg.multiscale)
        self.grid = GridFusion(gch, gch, cfg.grid_rows, cfg.grid_cols)
        self.refine = nn.Sequential(
            nn.Conv2d(2 * gch + 3, gch, 3, 1, 1), nn.LeakyReLU(0.1),
            nn.Conv2d(gch, gch, 3, 1, 1), nn.LeakyReLU(0.1),
            nn.Conv2d(gch, 4 * gch, 3, 1, 1), nn.PixelShuffle(2),
        )
        self.stem = nn.Conv2d(gch + 3, cfg.attention_dim, 3, 1, 1)
        self.layers = nn.Sequential(*[TransformerLayer(cfg.attention_dim, cfg.attention_heads)
                                      for _ in range(cfg.attention_layers)])
        self.out = nn.Conv2d(cfg.attention_dim, 3, 3, 1, 1)

    def forward(self, y_hat: torch.Tensor, prior: Optional[torch.Tensor], x_bar: torch.Tensor) -> torch.Tensor:
        b, c, h, w = y_hat.shape
        if c != self.latent_channels:
            raise ContractError(f"latent has {c} channels, decoder expects {self.latent_channels}")
        if tuple(x_bar.shape[-2:]) != (16 * h, 16 * w):
            raise ContractError(f"interpolated frame {tuple(x_bar.shape[-2:])} does not match latent {h}x{w}")
        if self.prior_channels:
            if prior is None:
                prior = y_hat.new_zeros(b, self.prior_channels, h, w)
            if prior.shape[1] != self.prior_channels or prior.shape[-2:] != y_hat.shape[-2:]:
                raise ContractError(f"prior {tuple(prior.shape)} incompatible with latent {tuple(y_hat.shape)}")
            latent = torch.cat([y_hat, prior], dim=1)
        else:
            latent = y_hat

        feats = self.extractor(latent)
        fine_first = list(reversed(feats.scales))
        rows = self.config.grid_rows
        row_inputs = fine_first[:rows]
        for extra in fine_first[rows:]:
            row_inputs[-1] = row_inputs[-1] + F.interpolate(
                extra, size=row_inputs[-1].shape[-2:], mode="bilinear", align_corners=False)
        fused = self.grid(row_inputs)

        x_bar_half = F.avg_pool2d(x_bar, 2)
        refined = self.refine(torch.cat([fused, feats.finest, x_bar_half], dim=1))
        features = self.layers(self.stem(torch.cat([refined, x_bar], dim=1)))
        return (x_bar + self.out(features)).clamp(0.0, 1.0)


def cscd_decode(y_hat: torch.Tensor, prior: PriorBuffer, x_bar: Frame, decoder: CSCDecoder) -> Frame:
    """Reconstruct x_hat from an unbatched latent [C, h, w], the prior buffer and x_bar."""
    latent = y_hat.unsqueeze(0) if y_hat.dim() == 3 else y_hat
    latent = latent.to(x_bar.pixels.dtype)
    with torch.no_grad():
        out = decoder(latent, prior.stacked(latent), x_bar.batch())
    return x_bar.with_pixels(out[0])
