#!/usr/bin/env python3
"""
Self-describing parameter archive shared by the interpolator and the codec.

Layout (torch.save of a plain dict):
    format, kind, version, arch_hash, config, metadata, state_dict
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

import torch

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "ibvc-checkpoint"

PathLike = Union[str, Path]


def architecture_hash(kind: str, config: Mapping[str, Any], state_dict: Mapping[str, torch.Tensor]) -> str:
    """Hash of the declared architecture: kind, config and parameter shapes."""
    h = hashlib.sha256()
    h.update(json.dumps({"kind": kind, "config": config}, sort_keys=True, default=list).encode())
    for name in sorted(state_dict):
        h.update(f"{name}:{tuple(state_dict[name].shape)}".encode())
    return h.hexdigest()


def parameter_digest(state_dict: Mapping[str, torch.Tensor]) -> bytes:
    """SHA-256 over parameter names, dtypes and raw values."""
    h = hashlib.sha256()
    for name in sorted(state_dict):
        t = state_dict[name].detach().cpu().contiguous()
        h.update(name.encode())
        h.update(str(t.dtype).encode())
        h.update(t.numpy().tobytes())
    return h.digest()


def save_checkpoint(path: PathLike, kind: str, version: int, config: Dict[str, Any],
                    state_dict: Mapping[str, torch.Tensor], metadata: Optional[Dict[str, Any]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cpu_state = {k: v.detach().cpu() for k, v in state_dict.items()}
    archive = {
        "format": CHECKPOINT_FORMAT,
        "kind": kind,
        "version": int(version),
        "arch_hash": architecture_hash(kind, config, cpu_state),
        "config": config,
        "metadata": dict(metadata or {}),
        "state_dict": cpu_state,
    }
    torch.save(archive, path)
    logger.info("saved %s checkpoint v%d to %s", kind, version, path)
    return path


def load_checkpoint(path: PathLike, kind: str, version: int) -> Dict[str, Any]:
    """Load and validate an archive; every mismatch is a ConfigurationError."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"checkpoint not found: {path}")
    try:
        archive = torch.load(path, map_location="cpu", weights_only=True)
    except Exception as e:
        raise ConfigurationError(f"cannot read checkpoint {path}: {e}") from e
    if not isinstance(archive, dict) or archive.get("format") != CHECKPOINT_FORMAT:
        raise ConfigurationError(f"{path} is not an IBVC checkpoint")
    if archive["kind"] != kind:
        raise ConfigurationError(f"{path} holds a '{archive['kind']}' checkpoint, expected '{kind}'")
    if archive["version"] != version:
        raise ConfigurationError(
            f"{path} has {kind} version {archive['version']}, this build reads version {version}")
    expected = architecture_hash(kind, archive["config"], archive["state_dict"])
    if expected != archive["arch_hash"]:
        raise ConfigurationError(f"{path}: architecture hash mismatch (archive edited or corrupt)")
    return archive
