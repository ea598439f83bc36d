#!/usr/bin/env python3
"""
One codec checkpoint per lambda of a distortion ladder.
"""

import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, Optional, Union

from torch.utils.data import Dataset

from arcodec.model import ArtifactCodec, save_codec
from core.config import CodecConfig, TrainConfig, cache_dir, ladder_ids
from core.seeding import seed_everything
from vfi.backend import InterpolatorBackend
from .trainer import build_state, fit

logger = logging.getLogger(__name__)


def build_model_ladder(backend: InterpolatorBackend, dataset: Dataset, config: TrainConfig,
                       distortion: str = "mse", codec_config: Optional[CodecConfig] = None,
                       out_dir: Optional[Union[str, Path]] = None) -> Dict[int, Path]:
    """Train every lambda of ``distortion``'s ladder; returns lambda_id -> checkpoint path."""
    out_dir = Path(out_dir) if out_dir is not None else cache_dir() / "codecs"
    checkpoints: Dict[int, Path] = {}
    for lambda_id in ladder_ids(distortion):
        cfg = replace(config, lambda_id=lambda_id)
        seed_everything(cfg.seed)
        codec = ArtifactCodec(codec_config)
        state = build_state(codec, backend, cfg)
        history = fit(state, dataset, cfg, log_path=out_dir / f"train_lambda{lambda_id}.csv")
        path = save_codec(codec, out_dir / f"codec_lambda{lambda_id}.pt", lambda_id,
                          {"steps": state.step, "final_loss": history[-1].loss if history else None})
        logger.info("lambda %s (%s): %d steps -> %s", cfg.lam, distortion, state.step, path)
        checkpoints[lambda_id] = path
    return checkpoints
