#!/usr/bin/env python3
"""
Desk corpus: procedural five-frame clips and clip-directory datasets.

Clips are textured sprites moving (translation plus rotation) over a
textured, slowly panning background. On disk a corpus is
``clips/<name>/%02d.png``.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import torch
from scipy.ndimage import gaussian_filter, map_coordinates
from torch.utils.data import Dataset

from core.errors import ConfigurationError, MalformedInputError
from core.frame import Frame
from video_io.sequence import list_images, load_image, save_image

logger = logging.getLogger(__name__)

CLIP_FRAMES = 5


def _texture(rng: np.random.Generator, h: int, w: int, smooth: float) -> np.ndarray:
    """Smooth colour noise in [0, 1], shape [3, h, w]."""
    noise = rng.random((3, h, w))
    tex = np.stack([gaussian_filter(c, smooth, mode="wrap") for c in noise])
    lo = tex.min(axis=(1, 2), keepdims=True)
    hi = tex.max(axis=(1, 2), keepdims=True)
    return (tex - lo) / np.maximum(hi - lo, 1e-6)


def sprite_clip(size: int = 64, frames: int = CLIP_FRAMES, sprites: int = 2,
                rng: Optional[np.random.Generator] = None) -> torch.Tensor:
    """Clip [frames, 3, size, size] of rotating, translating sprites over a panning background."""
    rng = rng or np.random.default_rng(0)
    pad = size // 2
    background = _texture(rng, size + 2 * pad, size + 2 * pad, smooth=size / 16)
    pan = rng.uniform(-1.5, 1.5, size=2)
    yy, xx = np.meshgrid(np.arange(size, dtype=np.float64), np.arange(size, dtype=np.float64), indexing="ij")

    specs = []
    for _ in range(sprites):
        radius = rng.uniform(size / 10, size / 5)
        specs.append(dict(
            texture=_texture(rng, size, size, smooth=2.0),
            centre=rng.uniform(radius, size - radius, size=2),
            velocity=rng.uniform(-3.0, 3.0, size=2),
            spin=rng.uniform(-0.15, 0.15),
            radius=radius,
        ))

    clip = np.empty((frames, 3, size, size), dtype=np.float32)
    for t in range(frames):
        coords = [yy + pad + pan[0] * t, xx + pad + pan[1] * t]
        img = np.stack([map_coordinates(c, coords, order=1, mode="reflect") for c in background])
        for s in specs:
            cy, cx = s["centre"] + s["velocity"] * t
            angle = s["spin"] * t
            dy, dx = yy - cy, xx - cx
            # rotate sample positions back into the sprite's frame
            sy = np.cos(angle) * dy + np.sin(angle) * dx
            sx = -np.sin(angle) * dy + np.cos(angle) * dx
            inside = (np.abs(sy) < s["radius"]) & (np.abs(sx) < s["radius"])
            src = [sy + size / 2, sx + size / 2]
            sprite = np.stack([map_coordinates(c, src, order=1, mode="wrap") for c in s["texture"]])
            img = np.where(inside[None], sprite, img)
        clip[t] = np.clip(img, 0.0, 1.0)
    return torch.from_numpy(clip)


def translating_square(size: int = 64, frames: int = 3, step: int = 4, square: int = 16,
                       start: int = 8) -> torch.Tensor:
    """Bright square moving ``step`` px per frame to the right over a dark gradient."""
    clip = torch.zeros(frames, 3, size, size)
    ramp = torch.linspace(0.1, 0.3, size)
    clip[:] = ramp.view(1, 1, 1, size)
    top = (size - square) // 2
    for t in range(frames):
        left = start + step * t
        clip[t, :, top:top + square, left:left + square] = 0.9
    return clip


def write_desk_corpus(root: Union[str, Path], num_clips: int = 16, size: int = 64,
                      frames: int = CLIP_FRAMES, seed: int = 0) -> List[Path]:
    """Write ``num_clips`` procedural clips under ``root/clips``."""
    rng = np.random.default_rng(seed)
    out = []
    for n in range(num_clips):
        clip_dir = Path(root) / "clips" / f"clip{n:04d}"
        clip_dir.mkdir(parents=True, exist_ok=True)
        for t, pixels in enumerate(sprite_clip(size, frames, rng=rng)):
            save_image(Frame(pixels, t), clip_dir / f"{t:02d}.png")
        out.append(clip_dir)
    logger.info("wrote %d desk clips to %s", num_clips, Path(root) / "clips")
    return out


class ClipDataset(Dataset):
    """Five-frame samples [5, 3, crop, crop] from ``root/clips/<name>/%02d.png``."""

    def __init__(self, root: Union[str, Path], crop: int = 256, seed: int = 0):
        base = Path(root)
        clips_dir = base / "clips" if (base / "clips").is_dir() else base
        self.clips = [d for d in sorted(clips_dir.iterdir()) if d.is_dir() and len(list_images(d)) >= CLIP_FRAMES]
        if not self.clips:
            raise ConfigurationError(f"no clips with >= {CLIP_FRAMES} frames under {clips_dir}")
        self.crop = crop
        self.seed = seed

    def __len__(self) -> int:
        return len(self.clips)

    def __getitem__(self, idx: int) -> torch.Tensor:
        paths = list_images(self.clips[idx])[:CLIP_FRAMES]
        frames = torch.stack([load_image(p, i).pixels for i, p in enumerate(paths)])
        _, _, h, w = frames.shape
        if h < self.crop or w < self.crop:
            raise MalformedInputError(f"{self.clips[idx]}: frames {h}x{w} smaller than crop {self.crop}")
        rng = np.random.default_rng(self.seed + idx)
        top = int(rng.integers(0, h - self.crop + 1))
        left = int(rng.integers(0, w - self.crop + 1))
        return frames[:, :, top:top + self.crop, left:left + self.crop].contiguous()


class SyntheticClipDataset(Dataset):
    """In-memory procedural clips; deterministic for a given seed."""

    def __init__(self, num_clips: int = 16, size: int = 64, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.samples = [sprite_clip(size, CLIP_FRAMES, rng=rng) for _ in range(num_clips)]

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, idx: int) -> torch.Tensor:
        return self.samples[idx]
