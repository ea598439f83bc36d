#!/usr/bin/env python3
"""
Interpolator backends: (ref_prev, ref_next) -> (flow_prev, flow_next, occlusion).

The default backend is a 4-level coarse-to-fine flow pyramid with a joint
flow + occlusion head. Backends are registered by name so checkpoints can
name the architecture they belong to.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import asdict
from pathlib import Path
from typing import Dict, Optional, Tuple, Type, Union

import torch
import torch.nn as nn
import torch.nn.functional as F

from core.checkpoint import load_checkpoint, parameter_digest, save_checkpoint
from core.config import VfiConfig, from_dict
from core.errors import ConfigurationError, ContractError
from .warp import warp_tensor

logger = logging.getLogger(__name__)

CHECKPOINT_KIND = "vfi"
CHECKPOINT_VERSION = 1

FlowOutput = Tuple[torch.Tensor, torch.Tensor, torch.Tensor]


class InterpolatorBackend(nn.Module, ABC):
    """Abstract midpoint flow estimator; deterministic for fixed parameters."""

    name: str = "abstract"
    version: int = 0

    @abstractmethod
    def forward(self, ref_prev: torch.Tensor, ref_next: torch.Tensor) -> FlowOutput:
        """Return flow_prev [B,2,H,W], flow_next [B,2,H,W], occlusion [B,1,H,W] in [0,1]."""

    @property
    def size_multiple(self) -> int:
        return 1

    def config_dict(self) -> Dict:
        return {}

    def digest(self) -> bytes:
        return parameter_digest(self.state_dict())


def _conv(cin: int, cout: int, stride: int = 1) -> nn.Sequential:
    return nn.Sequential(nn.Conv2d(cin, cout, 3, stride, 1), nn.PReLU(cout))


class _Head(nn.Module):
    """Predicts 2 + 2 flow channels and one occlusion logit."""

    def __init__(self, cin: int, width: int):
        super().__init__()
        self.body = nn.Sequential(_conv(cin, width), _conv(width, width))
        self.out = nn.Conv2d(width, 5, 3, 1, 1)
        nn.init.zeros_(self.out.weight)
        nn.init.zeros_(self.out.bias)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.out(self.body(x))


class PyramidFlowBackend(InterpolatorBackend):
    name = "pyramid"
    version = 1

    def __init__(self, config: Optional[VfiConfig] = None):
        super().__init__()
        self.config = config or VfiConfig()
        self.config.validate()
        chans = self.config.channels
        self.encoder = nn.ModuleList()
        cin = 3
        for c in chans:
            self.encoder.append(nn.Sequential(_conv(cin, c, stride=2), _conv(c, c)))
            cin = c
        self.heads = nn.ModuleList()
        for level, c in enumerate(chans):
            coarsest = level == len(chans) - 1
            head_in = 2 * c if coarsest else 2 * c + 5
            self.heads.append(_Head(head_in, 2 * c))

    @property
    def size_multiple(self) -> int:
        return 2 ** self.config.levels

    def config_dict(self) -> Dict:
        return asdict(self.config)

    def _features(self, x: torch.Tensor):
        feats = []
        for stage in self.encoder:
            x = stage(x)
            feats.append(x)
        return feats

    def forward(self, ref_prev: torch.Tensor, ref_next: torch.Tensor) -> FlowOutput:
        if ref_prev.shape != ref_next.shape:
            raise ContractError(f"references differ in shape: {tuple(ref_prev.shape)} vs {tuple(ref_next.shape)}")
        h, w = ref_prev.shape[-2:]
        m = self.size_multiple
        if h % m or w % m:
            raise ContractError(f"frame size {h}x{w} must be a multiple of {m}")
        f0 = self._features(ref_prev - 0.5)
        f1 = self._features(ref_next - 0.5)

        state = None
        for level in reversed(range(self.config.levels)):
            a, b = f0[level], f1[level]
            if state is None:
                state = self.heads[level](torch.cat([a, b], 1))
                continue
            state = F.interpolate(state, scale_factor=2.0, mode="bilinear", align_corners=False)
            state = torch.cat([state[:, :4] * 2.0, state[:, 4:]], 1)
            wa = warp_tensor(a, state[:, 0:2])
            wb = warp_tensor(b, state[:, 2:4])
            state = state + self.heads[level](torch.cat([wa, wb, state], 1))

        state = F.interpolate(state, scale_factor=2.0, mode="bilinear", align_corners=False)
        flow_prev = state[:, 0:2] * 2.0
        flow_next = state[:, 2:4] * 2.0
        occlusion = torch.sigmoid(state[:, 4:5])
        return flow_prev, flow_next, occlusion


BACKENDS: Dict[str, Type[InterpolatorBackend]] = {
    PyramidFlowBackend.name: PyramidFlowBackend,
}


def build_backend(name: str = "pyramid", config: Optional[VfiConfig] = None) -> InterpolatorBackend:
    if name not in BACKENDS:
        raise ConfigurationError(f"unknown interpolator backend '{name}', known: {sorted(BACKENDS)}")
    return BACKENDS[name](config)


def save_backend(backend: InterpolatorBackend, path: Union[str, Path], metadata: Optional[Dict] = None) -> Path:
    meta = {"backend": backend.name, "backend_version": backend.version}
    meta.update(metadata or {})
    return save_checkpoint(path, CHECKPOINT_KIND, CHECKPOINT_VERSION, backend.config_dict(),
                           backend.state_dict(), meta)


def load_backend(path: Union[str, Path]) -> InterpolatorBackend:
    archive = load_checkpoint(path, CHECKPOINT_KIND, CHECKPOINT_VERSION)
    meta = archive["metadata"]
    name = meta.get("backend", PyramidFlowBackend.name)
    cls = BACKENDS.get(name)
    if cls is None:
        raise ConfigurationError(f"{path}: unknown interpolator backend '{name}'")
    if meta.get("backend_version") != cls.version:
        raise ConfigurationError(
            f"{path}: backend '{name}' version {meta.get('backend_version')} != {cls.version}")
    backend = cls(from_dict(VfiConfig, archive["config"]))
    backend.load_state_dict(archive["state_dict"])
    backend.eval()
    logger.info("loaded %s backend from %s", name, path)
    return backend
