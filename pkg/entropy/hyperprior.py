#!/usr/bin/env python3
"""
Hyperprior entropy model for the main latent.

h_a maps the latent to a hyper latent z at 1/4 of its resolution (two stride-2
levels by default); z is coded with the factorized prior and h_s turns it into
per-element Gaussian means and scales for the main latent. An optional masked
5x5 context over already coded latents refines those parameters.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import torch
import torch.nn as nn
import torch.nn.functional as F

from arcodec.quantization import quantize
from core.config import EntropyConfig
from core.errors import ContractError
from .factorized import FactorizedPrior
from .gaussian import RateEstimate, gaussian_likelihood

CONTEXT_KERNEL = 5


@dataclass
class HyperLatent:
    """Integer-valued hyper latent [C_h, H/64, W/64] (batched as [B, C_h, h, w])."""
    values: torch.Tensor


@dataclass
class EntropyOutput:
    y_hat: torch.Tensor
    z_hat: torch.Tensor
    means: torch.Tensor
    scales: torch.Tensor
    y_rate: RateEstimate
    z_rate: RateEstimate

    @property
    def rate(self) -> RateEstimate:
        return self.y_rate + self.z_rate


class MaskedConv2d(nn.Conv2d):
    """Causal ('A') mask: only positions strictly before the centre in raster order."""

    def __init__(self, cin: int, cout: int, kernel: int = CONTEXT_KERNEL):
        super().__init__(cin, cout, kernel, padding=kernel // 2)
        mask = torch.ones_like(self.weight)
        mask[:, :, kernel // 2, kernel // 2:] = 0
        mask[:, :, kernel // 2 + 1:] = 0
        self.register_buffer("mask", mask)

    def masked_weight(self) -> torch.Tensor:
        return self.weight * self.mask

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.conv2d(x, self.masked_weight(), self.bias, padding=self.padding)


class EntropyModel(nn.Module):
    def __init__(self, latent_channels: int, config: Optional[EntropyConfig] = None):
        super().__init__()
        self.config = config or EntropyConfig()
        self.config.validate()
        c, ch = latent_channels, self.config.hyper_channels
        self.latent_channels = c

        analysis = [nn.Conv2d(c, ch, 3, 1, 1)]
        for _ in range(self.config.hyper_levels):
            analysis += [nn.LeakyReLU(0.1), nn.Conv2d(ch, ch, 5, 2, 2)]
        self.h_a = nn.Sequential(*analysis)

        synthesis = []
        for _ in range(self.config.hyper_levels):
            synthesis += [nn.ConvTranspose2d(ch, ch, 5, 2, 2, output_padding=1), nn.LeakyReLU(0.1)]
        synthesis.append(nn.Conv2d(ch, 2 * c, 3, 1, 1))
        self.h_s = nn.Sequential(*synthesis)

        self.hyper_prior = FactorizedPrior(ch, self.config.factorized_filters,
                                           self.config.factorized_init_scale,
                                           self.config.likelihood_bound)
        if self.config.use_context:
            self.context = MaskedConv2d(c, 2 * c)
            self.entropy_parameters = nn.Sequential(
                nn.Conv2d(4 * c, 3 * c, 1), nn.LeakyReLU(0.1), nn.Conv2d(3 * c, 2 * c, 1))

    @property
    def downsample(self) -> int:
        return 2 ** self.config.hyper_levels

    def split_params(self, params: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        means, raw = params.chunk(2, dim=1)
        return means, F.softplus(raw).clamp_min(self.config.scale_bound)

    def hyper_params(self, z_hat: torch.Tensor) -> torch.Tensor:
        return self.h_s(z_hat)

    def gaussian_params(self, hyper_params: torch.Tensor,
                        y_hat: Optional[torch.Tensor] = None) -> Tuple[torch.Tensor, torch.Tensor]:
        if not self.config.use_context:
            return self.split_params(hyper_params)
        if y_hat is None:
            raise ContractError("context model needs the quantized latent")
        ctx = self.context(y_hat)
        return self.split_params(self.entropy_parameters(torch.cat([hyper_params, ctx], 1)))

    def position_params(self, hyper_params: torch.Tensor, y_padded: torch.Tensor,
                        i: int, j: int) -> Tuple[torch.Tensor, torch.Tensor]:
        """Context parameters at one position from a zero-padded causal buffer.

        Encoder and decoder both call this with buffers whose not-yet-coded
        positions are zero, so the results are identical.
        """
        k = CONTEXT_KERNEL
        patch = y_padded[:, :, i:i + k, j:j + k]
        ctx = F.conv2d(patch, self.context.masked_weight(), self.context.bias)
        params = torch.cat([hyper_params[:, :, i:i + 1, j:j + 1], ctx], 1)
        return self.split_params(self.entropy_parameters(params))

    def forward(self, y: torch.Tensor, mode: str = "train",
                noise_y: Optional[torch.Tensor] = None, noise_z: Optional[torch.Tensor] = None,
                generator: Optional[torch.Generator] = None) -> EntropyOutput:
        if y.shape[-2] % self.downsample or y.shape[-1] % self.downsample:
            raise ContractError(f"latent {tuple(y.shape[-2:])} not divisible by hyper downsampling {self.downsample}")
        z = self.h_a(y)
        z_hat = quantize(z, mode, noise=noise_z, generator=generator)
        y_hat = quantize(y, mode, noise=noise_y, generator=generator)
        means, scales = self.gaussian_params(self.hyper_params(z_hat), y_hat)
        y_lik = gaussian_likelihood(y_hat, means, scales, self.config.likelihood_bound)
        z_lik = self.hyper_prior.likelihood(z_hat)
        return EntropyOutput(y_hat=y_hat, z_hat=z_hat, means=means, scales=scales,
                             y_rate=RateEstimate.from_likelihoods(y_lik),
                             z_rate=RateEstimate.from_likelihoods(z_lik))


def model_likelihoods(y: torch.Tensor, hyper: HyperLatent, model: EntropyModel,
                      mode: str = "inference", noise: Optional[torch.Tensor] = None,
                      generator: Optional[torch.Generator] = None
                      ) -> Tuple[RateEstimate, torch.Tensor, torch.Tensor]:
    """Rate of the main latent given a quantized hyper latent, plus (mu, sigma).

    ``y`` may be real (quantized here according to ``mode``) or already integer.
    """
    for name, p in model.named_parameters():
        if not torch.isfinite(p).all():
            raise ContractError(f"entropy parameter '{name}' is not finite")
    y_hat = quantize(y, mode, noise=noise, generator=generator)
    means, scales = model.gaussian_params(model.hyper_params(hyper.values), y_hat)
    lik = gaussian_likelihood(y_hat, means, scales, model.config.likelihood_bound)
    return RateEstimate.from_likelihoods(lik), means, scales
