#!/usr/bin/env python3
"""
Raw planar YUV and PNG-directory ingest/emit.

YUV files are frame-major with plane order Y, U, V (8-bit). Image directories
hold one lossless image per frame with a numeric stem (``%06d.png``).
"""

import logging
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import torch
from PIL import Image

from core.errors import ConfigurationError, MalformedInputError
from core.frame import Frame
from .color import chroma_shape, rgb_to_yuv, yuv_to_rgb

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
_NUMERIC_STEM = re.compile(r"^\d+$")
IMAGE_SUFFIXES = (".png", ".bmp", ".tif", ".tiff")


class PixelFormat(str, Enum):
    YUV420P8 = "yuv420p8"
    YUV444P8 = "yuv444p8"
    RGB_PNG_DIR = "rgb_png_dir"

    @classmethod
    def parse(cls, value: Union[str, "PixelFormat"]) -> "PixelFormat":
        if isinstance(value, PixelFormat):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ConfigurationError(
                f"unsupported pixel format '{value}', expected one of {[p.value for p in cls]}") from None

    @property
    def subsampling(self) -> str:
        return "420" if self is PixelFormat.YUV420P8 else "444"


@dataclass(frozen=True)
class SequenceSpec:
    width: int
    height: int
    num_frames: int
    pixel_format: PixelFormat = PixelFormat.YUV420P8

    def __post_init__(self):
        object.__setattr__(self, "pixel_format", PixelFormat.parse(self.pixel_format))
        if self.width < 1 or self.height < 1:
            raise ConfigurationError(f"invalid frame size {self.width}x{self.height}")
        if self.num_frames < 1:
            raise ConfigurationError(f"num_frames must be >= 1, got {self.num_frames}")

    def plane_shapes(self):
        c = chroma_shape(self.height, self.width, self.pixel_format.subsampling)
        return (self.height, self.width), c, c

    @property
    def frame_bytes(self) -> int:
        return sum(h * w for h, w in self.plane_shapes())


def _read_yuv(path: Path, spec: SequenceSpec) -> List[Frame]:
    expected = spec.frame_bytes * spec.num_frames
    actual = path.stat().st_size
    if actual != expected:
        raise MalformedInputError(
            f"{path}: {actual} bytes, expected {expected} for {spec.num_frames} "
            f"{spec.width}x{spec.height} {spec.pixel_format.value} frames")
    raw = np.fromfile(path, dtype=np.uint8)
    shapes = spec.plane_shapes()
    frames = []
    pos = 0
    for i in range(spec.num_frames):
        planes = []
        for h, w in shapes:
            planes.append(raw[pos:pos + h * w].reshape(h, w))
            pos += h * w
        frames.append(yuv_to_rgb(*planes, bit_depth=8, index=i))
    return frames


def list_images(directory: Path) -> List[Path]:
    files = [p for p in directory.iterdir()
             if p.suffix.lower() in IMAGE_SUFFIXES and _NUMERIC_STEM.match(p.stem)]
    return sorted(files, key=lambda p: int(p.stem))


def load_image(path: PathLike, index: int = 0) -> Frame:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    pixels = torch.from_numpy(arr.astype(np.float32) / 255.0).permute(2, 0, 1).contiguous()
    return Frame(pixels=pixels, index=index)


def save_image(frame: Frame, path: PathLike) -> None:
    arr = (frame.pixels.detach().clamp(0, 1) * 255.0).round().to(torch.uint8)
    Image.fromarray(arr.permute(1, 2, 0).cpu().numpy()).save(path)


def _read_png_dir(path: Path, spec: SequenceSpec) -> List[Frame]:
    files = list_images(path)
    if len(files) < spec.num_frames:
        raise MalformedInputError(f"{path}: {len(files)} images, expected {spec.num_frames}")
    frames = []
    for i, f in enumerate(files[:spec.num_frames]):
        frame = load_image(f, index=i)
        if frame.size != (spec.height, spec.width):
            raise MalformedInputError(
                f"{f}: size {frame.width}x{frame.height}, expected {spec.width}x{spec.height}")
        frames.append(frame)
    return frames


def read_sequence(path: PathLike, spec: SequenceSpec) -> List[Frame]:
    """Read ``spec.num_frames`` frames in display order as RGB in [0, 1]."""
    path = Path(path)
    fmt = PixelFormat.parse(spec.pixel_format)
    if fmt is PixelFormat.RGB_PNG_DIR:
        if not path.is_dir():
            raise MalformedInputError(f"{path} is not an image directory")
        frames = _read_png_dir(path, spec)
    else:
        if not path.is_file():
            raise MalformedInputError(f"{path} does not exist")
        frames = _read_yuv(path, spec)
    logger.info("read %d frames %dx%d from %s", len(frames), spec.width, spec.height, path)
    return frames


def write_sequence(frames: Sequence[Frame], path: PathLike,
                   pixel_format: Union[str, PixelFormat] = PixelFormat.RGB_PNG_DIR) -> Path:
    fmt = PixelFormat.parse(pixel_format)
    path = Path(path)
    if fmt is PixelFormat.RGB_PNG_DIR:
        path.mkdir(parents=True, exist_ok=True)
        for i, frame in enumerate(frames):
            save_image(frame, path / f"{i:06d}.png")
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            for frame in frames:
                for plane in rgb_to_yuv(frame, fmt.subsampling):
                    fh.write(np.ascontiguousarray(plane).tobytes())
    return path
