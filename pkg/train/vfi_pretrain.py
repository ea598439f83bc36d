#!/usr/bin/env python3
"""
Interpolator pretraining with pixel L1 plus soft census loss.

Every five-frame sample yields three (prev, middle, next) triplets.
"""

import logging
from typing import List, Optional

import torch
from torch.utils.data import DataLoader, Dataset
from tqdm import tqdm

from core.config import VfiConfig
from core.errors import TrainingAbort
from vfi.backend import InterpolatorBackend
from vfi.interpolate import interpolate_tensors
from vfi.losses import interpolation_loss

logger = logging.getLogger(__name__)

TRIPLETS = ((0, 1, 2), (1, 2, 3), (2, 3, 4))


def pretrain_backend(backend: InterpolatorBackend, dataset: Dataset, epochs: int = 5, lr: float = 1e-3,
                     batch: int = 4, seed: int = 0, max_steps: int = 0,
                     config: Optional[VfiConfig] = None) -> List[float]:
    """Train ``backend`` in place; returns the per-step losses."""
    config = config or getattr(backend, "config", VfiConfig())
    loader = DataLoader(dataset, batch_size=batch, shuffle=True,
                        generator=torch.Generator().manual_seed(seed))
    optimizer = torch.optim.Adam(backend.parameters(), lr=lr)
    backend.requires_grad_(True)
    backend.train()
    losses: List[float] = []
    for epoch in range(epochs):
        for clip in tqdm(loader, desc=f"vfi {epoch + 1}/{epochs}", leave=False):
            loss = 0.0
            for prev, mid, nxt in TRIPLETS:
                pred = interpolate_tensors(clip[:, prev], clip[:, nxt], backend)[0]
                loss = loss + interpolation_loss(pred, clip[:, mid], config.census_patch, config.census_weight)
            loss = loss / len(TRIPLETS)
            if not torch.isfinite(loss):
                raise TrainingAbort(f"non-finite interpolation loss at step {len(losses)}", group="vfi")
            optimizer.zero_grad(set_to_none=True)
            loss.backward()
            optimizer.step()
            losses.append(float(loss))
            if max_steps and len(losses) >= max_steps:
                backend.eval()
                return losses
        logger.info("vfi epoch %d/%d: loss %.5f", epoch + 1, epochs, losses[-1])
    backend.eval()
    return losses
