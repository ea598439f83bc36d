#!/usr/bin/env python3
"""
Finite-difference checks of the training loss gradient.

Runs in float64 on a tiny codec with fixed quantization noise. For each
parameter group the analytic directional derivative along a random unit
direction is compared with a central difference.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import torch

from arcodec.model import ArtifactCodec
from arcodec.weight_map import weight_map_tensor
from core.config import CodecConfig, VfiConfig
from vfi.backend import PyramidFlowBackend
from vfi.interpolate import interpolate_tensors
from .losses import rd_loss


@dataclass
class GradCheckResult:
    name: str
    analytic: float
    numeric: float

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.analytic), abs(self.numeric), 1e-12)
        return abs(self.analytic - self.numeric) / scale


@dataclass
class TinyProblem:
    codec: ArtifactCodec
    backend: PyramidFlowBackend
    ref_prev: torch.Tensor
    ref_next: torch.Tensor
    x: torch.Tensor
    noise_y: torch.Tensor
    noise_z: torch.Tensor
    lam: float = 256.0

    def loss(self, x: Optional[torch.Tensor] = None) -> torch.Tensor:
        x = self.x if x is None else x
        x_bar = interpolate_tensors(self.ref_prev, self.ref_next, self.backend)[0]
        out = self.codec(x, x_bar, None, mode="train", noise_y=self.noise_y, noise_z=self.noise_z)
        h, w = x.shape[-2:]
        return rd_loss([x], [out.x_hat], [out.rate.per_sample() / float(h * w)], self.lam).loss

    def groups(self) -> Dict[str, torch.nn.Module]:
        groups = dict(self.codec.parameter_groups())
        groups["vfi"] = self.backend
        return groups


def tiny_problem(seed: int = 0, size: int = 32) -> TinyProblem:
    gen = torch.Generator().manual_seed(seed)
    torch.manual_seed(seed)
    codec = ArtifactCodec(CodecConfig.tiny()).double()
    backend = PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8))).double()
    with torch.no_grad():
        # move flows off integer positions where bilinear sampling has kinks
        for p in backend.parameters():
            p.add_(0.01 * torch.randn(p.shape, generator=gen, dtype=p.dtype))

    def frame():
        return 0.2 + 0.6 * torch.rand(1, 3, size, size, generator=gen, dtype=torch.float64)

    ref_prev, ref_next, x = frame(), frame(), frame()
    c, h, w = codec.latent_shape(size, size)
    with torch.no_grad():
        x_bar = interpolate_tensors(ref_prev, ref_next, backend)[0]
        y = codec.encoder(x, x_bar, weight_map_tensor(x, x_bar, codec.config.mask_mode))
        z_shape = codec.entropy.h_a(y).shape
    noise_y = torch.rand((1, c, h, w), generator=gen, dtype=torch.float64) - 0.5
    noise_z = torch.rand(z_shape, generator=gen, dtype=torch.float64) - 0.5
    return TinyProblem(codec, backend, ref_prev, ref_next, x, noise_y, noise_z)


def _directional(loss_fn: Callable[[], torch.Tensor], params: List[torch.Tensor],
                 gen: torch.Generator, eps: float) -> GradCheckResult:
    direction = [torch.randn(p.shape, generator=gen, dtype=p.dtype) for p in params]
    norm = torch.sqrt(sum((d ** 2).sum() for d in direction))
    direction = [d / norm for d in direction]

    for p in params:
        p.grad = None
    loss = loss_fn()
    grads = torch.autograd.grad(loss, params, allow_unused=True)
    analytic = float(sum((g * d).sum() for g, d in zip(grads, direction) if g is not None))

    with torch.no_grad():
        for p, d in zip(params, direction):
            p.add_(eps * d)
        plus = float(loss_fn())
        for p, d in zip(params, direction):
            p.sub_(2 * eps * d)
        minus = float(loss_fn())
        for p, d in zip(params, direction):
            p.add_(eps * d)
    return GradCheckResult("", analytic, (plus - minus) / (2 * eps))


def check_parameter_groups(problem: TinyProblem, eps: float = 1e-6, seed: int = 0) -> List[GradCheckResult]:
    gen = torch.Generator().manual_seed(seed)
    results = []
    for name, module in problem.groups().items():
        params = [p for p in module.parameters()]
        for p in params:
            p.requires_grad_(True)
        result = _directional(problem.loss, params, gen, eps)
        result.name = name
        results.append(result)
    return results


def check_input_gradient(problem: TinyProblem, eps: float = 1e-6, seed: int = 0) -> GradCheckResult:
    gen = torch.Generator().manual_seed(seed)
    x = problem.x.clone().requires_grad_(True)
    result = _directional(lambda: problem.loss(x), [x], gen, eps)
    result.name = "input"
    return result
