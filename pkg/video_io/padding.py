#!/usr/bin/env python3
"""
Replicate padding to network-friendly sizes and its exact inverse.
"""

from dataclasses import replace

import torch.nn.functional as F

from core.errors import ContractError
from core.frame import Frame

DEFAULT_MULTIPLE = 64


def padded_size(height: int, width: int, multiple: int = DEFAULT_MULTIPLE):
    if multiple < 1:
        raise ContractError(f"padding multiple must be >= 1, got {multiple}")
    return (-(-height // multiple) * multiple, -(-width // multiple) * multiple)


def pad_to_multiple(frame: Frame, multiple: int = DEFAULT_MULTIPLE) -> Frame:
    """Replicate-pad right/bottom; ``original_size`` keeps the pre-padding size."""
    h, w = frame.size
    ph, pw = padded_size(h, w, multiple)
    if (ph, pw) == (h, w):
        return frame
    pixels = F.pad(frame.pixels.unsqueeze(0), (0, pw - w, 0, ph - h), mode="replicate").squeeze(0)
    return replace(frame, pixels=pixels, original_size=frame.original_size)


def crop_to_original(frame: Frame) -> Frame:
    h0, w0 = frame.original_size
    if (h0, w0) == frame.size:
        return frame
    return replace(frame, pixels=frame.pixels[:, :h0, :w0].contiguous(), original_size=(h0, w0))
