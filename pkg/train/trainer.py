#!/usr/bin/env python3
"""
Codec training on five-frame samples.

Frames 1 and 3 of each sample are the B targets, interpolated from their
clean neighbours (0, 2) and (2, 4). The first target is coded with an empty
prior, the second with the first target's noisy latent. Noise for step n is
drawn from a generator seeded with ``seed + n``.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import torch
from torch.utils.data import DataLoader, Dataset
from tqdm import tqdm

from arcodec.model import ArtifactCodec
from core.config import TrainConfig
from core.errors import ContractError, TrainingAbort
from vfi.backend import InterpolatorBackend
from vfi.interpolate import interpolate_tensors
from .losses import RDTerms, rd_loss

logger = logging.getLogger(__name__)

# (target, previous reference, next reference) inside a five-frame sample
TARGETS = ((1, 0, 2), (3, 2, 4))
LOG_COLUMNS = ("step", "loss", "rate_bpp", "distortion")


@dataclass
class StepMetrics:
    step: int
    loss: float
    rate_bpp: float
    distortion: float


@dataclass
class TrainState:
    codec: ArtifactCodec
    backend: InterpolatorBackend
    optimizer: Optional[torch.optim.Optimizer]
    step: int = 0
    phase: str = "main"

    def parameter_groups(self) -> Dict[str, torch.nn.Module]:
        groups = dict(self.codec.parameter_groups())
        groups["vfi"] = self.backend
        return groups


def trainable_parameters(codec: ArtifactCodec, backend: InterpolatorBackend, freeze_vfi: bool = True):
    params = [p for p in codec.parameters() if p.requires_grad]
    if not freeze_vfi:
        params += [p for p in backend.parameters() if p.requires_grad]
    return params


def build_state(codec: ArtifactCodec, backend: InterpolatorBackend, config: TrainConfig,
                lr: Optional[float] = None) -> TrainState:
    config.validate()
    backend.requires_grad_(not config.freeze_vfi)
    params = trainable_parameters(codec, backend, config.freeze_vfi)
    optimizer = (torch.optim.Adam(params, lr=config.lr_main if lr is None else lr, betas=tuple(config.betas))
                 if params else None)
    return TrainState(codec=codec, backend=backend, optimizer=optimizer)


def _prior_from(y_hat: torch.Tensor, k: int) -> Optional[torch.Tensor]:
    if k == 0:
        return None
    return torch.cat([torch.zeros_like(y_hat)] * (k - 1) + [y_hat], dim=1)


def forward_sample(batch: torch.Tensor, codec: ArtifactCodec, backend: InterpolatorBackend,
                   config: TrainConfig, generator: Optional[torch.Generator] = None) -> RDTerms:
    """R-D terms for a batch [B, 5, 3, H, W]."""
    if batch.dim() != 5 or batch.shape[1] != 5:
        raise ContractError(f"training batch must be [B, 5, 3, H, W], got {tuple(batch.shape)}")
    h, w = batch.shape[-2:]
    targets, recons, rates = [], [], []
    prior = None
    for target, prev, nxt in TARGETS[:config.T]:
        x = batch[:, target]
        if config.freeze_vfi:
            with torch.no_grad():
                x_bar = interpolate_tensors(batch[:, prev], batch[:, nxt], backend)[0]
        else:
            x_bar = interpolate_tensors(batch[:, prev], batch[:, nxt], backend)[0]
        out = codec(x, x_bar, prior, mode="train", generator=generator)
        targets.append(x)
        recons.append(out.x_hat)
        rates.append(out.rate.per_sample() / float(h * w))
        prior = _prior_from(out.y_hat, codec.config.prior_k)
    return rd_loss(targets, recons, rates, config.lam, config.distortion)


def check_gradients(state: TrainState) -> None:
    for name, module in state.parameter_groups().items():
        for param in module.parameters():
            if param.grad is not None and not torch.isfinite(param.grad).all():
                raise TrainingAbort(f"non-finite gradient in parameter group '{name}'", group=name)


def train_step(batch: torch.Tensor, state: TrainState, config: TrainConfig) -> StepMetrics:
    """One optimizer update; the step counter only advances when parameters change."""
    generator = torch.Generator().manual_seed(config.seed + state.step)
    state.codec.train()
    state.backend.train(not config.freeze_vfi)
    try:
        terms = forward_sample(batch, state.codec, state.backend, config, generator)
    except ContractError as e:
        raise TrainingAbort(f"step {state.step}: {e}") from e
    metrics = StepMetrics(state.step, float(terms.loss), float(terms.rate_bpp), float(terms.distortion))
    if state.optimizer is None or not terms.loss.requires_grad:
        return metrics
    state.optimizer.zero_grad(set_to_none=True)
    terms.loss.backward()
    check_gradients(state)
    state.optimizer.step()
    state.step += 1
    return metrics


def _set_lr(optimizer: torch.optim.Optimizer, lr: float) -> None:
    for group in optimizer.param_groups:
        group["lr"] = lr


def _phases(config: TrainConfig):
    yield "main", config.epochs_main, config.lr_main
    if config.epochs_finetune:
        yield "finetune", config.epochs_finetune, config.lr_finetune


def fit(state: TrainState, dataset: Dataset, config: TrainConfig,
        log_path: Optional[Union[str, Path]] = None) -> List[StepMetrics]:
    """Main phase then fine-tuning phase; ``config.max_steps`` caps the total when non-zero."""
    loader = DataLoader(dataset, batch_size=config.batch, shuffle=True, drop_last=False,
                        num_workers=config.num_workers,
                        generator=torch.Generator().manual_seed(config.seed))
    history: List[StepMetrics] = []
    writer, handle = None, None
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        handle = open(log_path, "w", newline="")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(LOG_COLUMNS)
    try:
        for phase, epochs, lr in _phases(config):
            state.phase = phase
            if state.optimizer is not None:
                _set_lr(state.optimizer, lr)
            for epoch in range(epochs):
                bar = tqdm(loader, desc=f"{phase} {epoch + 1}/{epochs}", leave=False)
                for batch in bar:
                    m = train_step(batch, state, config)
                    history.append(m)
                    bar.set_postfix(loss=f"{m.loss:.4f}", bpp=f"{m.rate_bpp:.4f}")
                    if writer is not None:
                        writer.writerow([m.step, repr(m.loss), repr(m.rate_bpp), repr(m.distortion)])
                    if config.max_steps and len(history) >= config.max_steps:
                        logger.info("stopping after %d steps", len(history))
                        return history
                logger.info("%s epoch %d/%d: last loss %.5f", phase, epoch + 1, epochs, history[-1].loss)
    finally:
        if handle is not None:
            handle.close()
    return history


def evaluate_loss(state: TrainState, batches: Iterable[torch.Tensor], config: TrainConfig) -> float:
    """Mean loss over ``batches`` with a fixed noise seed and no updates."""
    state.codec.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for batch in batches:
            generator = torch.Generator().manual_seed(config.seed)
            total += float(forward_sample(batch, state.codec, state.backend, config, generator).loss)
            count += 1
    return total / max(count, 1)
