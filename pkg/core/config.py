#!/usr/bin/env python3
"""
Parameter dataclasses for every stage, the lambda ladder and cache location.

Each dataclass validates itself with ``validate()`` and round-trips through
``dataclasses.asdict`` so it can be stored inside checkpoints.
"""

import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Tuple, Type, TypeVar

from .errors import ConfigurationError

T = TypeVar("T")

# lambda_id -> (distortion, lambda); ids are persisted in bitstreams and checkpoints
LAMBDA_LADDER: Dict[int, Tuple[str, float]] = {
    0: ("mse", 256.0),
    1: ("mse", 512.0),
    2: ("mse", 1024.0),
    3: ("mse", 2048.0),
    4: ("ms-ssim", 8.0),
    5: ("ms-ssim", 16.0),
    6: ("ms-ssim", 32.0),
    7: ("ms-ssim", 64.0),
}

DISTORTIONS = ("mse", "ms-ssim")


def lambda_for_id(lambda_id: int) -> Tuple[str, float]:
    if lambda_id not in LAMBDA_LADDER:
        raise ConfigurationError(f"unknown lambda id {lambda_id}; valid ids {sorted(LAMBDA_LADDER)}")
    return LAMBDA_LADDER[lambda_id]


def id_for_lambda(distortion: str, lam: float) -> int:
    for lid, (dist, value) in LAMBDA_LADDER.items():
        if dist == distortion and value == float(lam):
            return lid
    raise ConfigurationError(f"lambda {lam} ({distortion}) is not on the ladder")


def ladder_ids(distortion: str) -> Tuple[int, ...]:
    if distortion not in DISTORTIONS:
        raise ConfigurationError(f"unknown distortion '{distortion}', expected one of {DISTORTIONS}")
    return tuple(lid for lid, (dist, _) in sorted(LAMBDA_LADDER.items()) if dist == distortion)


def cache_dir() -> Path:
    """Checkpoint cache directory, overridable with IBVC_CACHE_DIR."""
    return Path(os.getenv("IBVC_CACHE_DIR", str(Path.home() / ".cache" / "ibvc")))


def from_dict(cls: Type[T], data: Dict[str, Any]) -> T:
    """Rebuild a (possibly nested) config dataclass from ``asdict`` output."""
    kwargs = {}
    for f in fields(cls):
        if f.name not in data:
            continue
        value = data[f.name]
        if isinstance(value, dict) and hasattr(f.type, "__dataclass_fields__"):
            value = from_dict(f.type, value)
        elif isinstance(value, list):
            value = tuple(value)
        kwargs[f.name] = value
    return cls(**kwargs)


@dataclass
class VfiConfig:
    levels: int = 4
    channels: Tuple[int, ...] = (16, 32, 48, 64)
    census_patch: int = 7
    census_weight: float = 1.0

    def validate(self) -> None:
        if self.levels < 1 or len(self.channels) != self.levels:
            raise ConfigurationError(
                f"vfi levels={self.levels} needs {self.levels} channel widths, got {self.channels}")
        if self.census_patch % 2 != 1:
            raise ConfigurationError(f"census patch must be odd, got {self.census_patch}")


@dataclass
class EntropyConfig:
    hyper_channels: int = 64
    hyper_levels: int = 2
    scale_bound: float = 0.11
    support: int = 64
    precision: int = 16
    use_context: bool = False
    escape_mode: str = "fixed"      # fixed | tail
    likelihood_bound: float = 1e-9
    factorized_filters: Tuple[int, ...] = (3, 3, 3)
    factorized_init_scale: float = 10.0

    def validate(self) -> None:
        if self.hyper_levels < 1:
            raise ConfigurationError(f"hyper_levels must be >= 1, got {self.hyper_levels}")
        if not 1 <= self.support <= 1024:
            raise ConfigurationError(f"support must be in [1, 1024], got {self.support}")
        if self.precision != 16:
            raise ConfigurationError(f"only 16-bit CDF precision is supported, got {self.precision}")
        if self.scale_bound <= 0:
            raise ConfigurationError(f"scale_bound must be positive, got {self.scale_bound}")
        if self.escape_mode not in ("fixed", "tail"):
            raise ConfigurationError(f"escape_mode must be 'fixed' or 'tail', got '{self.escape_mode}'")


@dataclass
class CodecConfig:
    encoder_channels: int = 64
    latent_channels: int = 96
    mask_mode: str = "sigmoid"      # sigmoid | linear | none
    prior_k: int = 1
    multiscale: str = "full"        # full | ends
    grid_rows: int = 3
    grid_cols: int = 4
    grid_channels: int = 32
    attention_dim: int = 64
    attention_layers: int = 4
    attention_heads: int = 4
    entropy: EntropyConfig = field(default_factory=EntropyConfig)

    def validate(self) -> None:
        if self.mask_mode not in ("sigmoid", "linear", "none"):
            raise ConfigurationError(f"unknown mask_mode '{self.mask_mode}'")
        if self.multiscale not in ("full", "ends"):
            raise ConfigurationError(f"unknown multiscale mode '{self.multiscale}'")
        if self.prior_k < 0:
            raise ConfigurationError(f"prior_k must be >= 0, got {self.prior_k}")
        if not 1 <= self.grid_rows <= 4:
            raise ConfigurationError(f"grid_rows must be in [1, 4], got {self.grid_rows}")
        if self.grid_cols < 2 or self.grid_cols % 2:
            raise ConfigurationError(f"grid_cols must be even and >= 2, got {self.grid_cols}")
        if self.attention_dim % self.attention_heads:
            raise ConfigurationError(
                f"attention_dim {self.attention_dim} not divisible by heads {self.attention_heads}")
        self.entropy.validate()

    @classmethod
    def tiny(cls, **overrides) -> "CodecConfig":
        """Small widths used by unit tests and gradient checks."""
        entropy = overrides.pop("entropy", EntropyConfig(hyper_channels=8, hyper_levels=1))
        base = dict(encoder_channels=8, latent_channels=8, grid_channels=8,
                    attention_dim=8, attention_layers=2, attention_heads=2, entropy=entropy)
        base.update(overrides)
        return cls(**base)


@dataclass
class IntraConfig:
    qualities: Tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    quality: int = 4
    support: int = 128

    def validate(self) -> None:
        if self.quality not in self.qualities:
            raise ConfigurationError(f"intra quality {self.quality} not in {self.qualities}")
        if any(q < 1 or q > 255 for q in self.qualities):
            raise ConfigurationError(f"intra quantization steps must be in [1, 255]: {self.qualities}")


@dataclass
class GopConfig:
    gop_size: int = 32
    n_bframes: int = 1
    b_mode: str = "codec"           # codec | interp_only

    def validate(self) -> None:
        if self.b_mode not in ("codec", "interp_only"):
            raise ConfigurationError(f"unknown b_mode '{self.b_mode}'")
        if not 1 <= self.gop_size <= 255:
            raise ConfigurationError(f"gop_size must fit in one byte, got {self.gop_size}")


@dataclass
class TrainConfig:
    lambda_id: int = 2
    epochs_main: int = 5
    epochs_finetune: int = 1
    lr_main: float = 1e-4
    lr_finetune: float = 1e-5
    batch: int = 4
    betas: Tuple[float, float] = (0.9, 0.999)
    crop: int = 256
    T: int = 2
    max_steps: int = 0              # 0 = run the epoch schedule
    freeze_vfi: bool = True
    seed: int = 0
    num_workers: int = 0

    @property
    def distortion(self) -> str:
        return lambda_for_id(self.lambda_id)[0]

    @property
    def lam(self) -> float:
        return lambda_for_id(self.lambda_id)[1]

    def validate(self) -> None:
        lambda_for_id(self.lambda_id)
        if self.T < 1:
            raise ConfigurationError(f"T must be >= 1, got {self.T}")
        if self.crop % 64:
            raise ConfigurationError(f"crop must be a multiple of 64, got {self.crop}")
        if self.batch < 1:
            raise ConfigurationError(f"batch must be >= 1, got {self.batch}")


def config_dict(cfg) -> Dict[str, Any]:
    return asdict(cfg)
