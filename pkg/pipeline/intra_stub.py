#!/usr/bin/env python3
"""
Built-in intra coder for I/P references: 8x8 block DCT, uniform quantization,
DPCM on DC coefficients and Laplace-modelled range coding per frequency band.

Payload: u8 step | 64 x u16 band scales (1/16 units) | varint-framed range stream
"""

import struct
from typing import Tuple

import numpy as np
import torch
from scipy.fft import dctn, idctn

from core.config import IntraConfig
from core.errors import ConfigurationError, ContractError, DecodeError
from core.frame import Frame
from entropy.range_coder import range_decode, range_encode, split_stream
from entropy.symbol_model import laplace_model

BLOCK = 8
BANDS = BLOCK * BLOCK
SCALE_UNIT = 16

_SCALES = struct.Struct(f"<{BANDS}H")


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def _to_blocks(pixels: np.ndarray) -> np.ndarray:
    """[3, H, W] -> [3, H/8, W/8, 8, 8]"""
    c, h, w = pixels.shape
    return pixels.reshape(c, h // BLOCK, BLOCK, w // BLOCK, BLOCK).transpose(0, 1, 3, 2, 4)


def _from_blocks(blocks: np.ndarray) -> np.ndarray:
    c, by, bx, _, _ = blocks.shape
    return blocks.transpose(0, 1, 3, 2, 4).reshape(c, by * BLOCK, bx * BLOCK)


def _symbols(q: np.ndarray) -> np.ndarray:
    """Quantized coefficients [3, by, bx, 64] -> symbols with DC replaced by raster DPCM residuals."""
    sym = q.copy()
    dc = q[..., 0].reshape(q.shape[0], -1)
    sym[..., 0] = np.diff(dc, axis=1, prepend=0).reshape(q.shape[:3])
    return sym


def _coefficients(sym: np.ndarray) -> np.ndarray:
    q = sym.copy()
    res = sym[..., 0].reshape(sym.shape[0], -1)
    q[..., 0] = np.cumsum(res, axis=1).reshape(sym.shape[:3])
    return q


def _band_model(scales_fixed: np.ndarray, count: int, support: int):
    index = np.tile(np.arange(BANDS, dtype=np.int64), count // BANDS)
    return laplace_model(scales_fixed.astype(np.float64) / SCALE_UNIT, support, index)


def reconstruct(q: np.ndarray, step: int, index: int = 0) -> Frame:
    """Dequantize and inverse-transform coefficients [3, by, bx, 64]; shared by encoder and decoder."""
    c, by, bx, _ = q.shape
    coef = (q.astype(np.float64) * step).reshape(c, by, bx, BLOCK, BLOCK)
    pixels = _from_blocks(idctn(coef, axes=(-2, -1), norm="ortho")) + 128.0
    out = np.clip(pixels / 255.0, 0.0, 1.0).astype(np.float32)
    return Frame(pixels=torch.from_numpy(out), index=index)


class IntraStub:
    def __init__(self, config: IntraConfig = None):
        self.config = config or IntraConfig()
        self.config.validate()

    def step_for(self, quality: int) -> int:
        if quality not in self.config.qualities:
            raise ConfigurationError(f"intra quality {quality} not in {self.config.qualities}")
        return int(quality)

    def encode(self, frame: Frame, quality: int = None) -> Tuple[bytes, Frame]:
        step = self.step_for(self.config.quality if quality is None else quality)
        h, w = frame.size
        if h % BLOCK or w % BLOCK:
            raise ContractError(f"intra coding needs sizes divisible by {BLOCK}, got {h}x{w}")
        pixels = frame.pixels.detach().cpu().double().numpy() * 255.0 - 128.0
        coef = dctn(_to_blocks(pixels), axes=(-2, -1), norm="ortho")
        q = _round_half_away(coef / step).reshape(3, h // BLOCK, w // BLOCK, BANDS)
        sym = _symbols(q)

        mean_abs = np.abs(sym).reshape(-1, BANDS).mean(axis=0)
        scales = np.clip(np.round(mean_abs * SCALE_UNIT), 0, 0xFFFF).astype(np.int64)
        model = _band_model(scales, sym.size, self.config.support)
        stream = range_encode(sym.reshape(-1), model)

        payload = bytes([step]) + _SCALES.pack(*scales.tolist()) + stream
        recon = reconstruct(q, step, frame.index)
        return payload, Frame(recon.pixels, frame.index, frame.coding_type, frame.original_size)

    def decode(self, payload: bytes, size: Tuple[int, int], index: int = 0) -> Frame:
        h, w = size
        head = 1 + _SCALES.size
        if len(payload) < head:
            raise DecodeError("intra payload shorter than its header", offset=len(payload))
        step = payload[0]
        if step == 0:
            raise DecodeError("intra quantization step is zero", offset=0)
        scales = np.asarray(_SCALES.unpack_from(payload, 1), dtype=np.int64)
        _, end = split_stream(payload, head)
        if end != len(payload):
            raise DecodeError(f"{len(payload) - end} unexpected bytes after intra stream", offset=end)
        shape = (3, h // BLOCK, w // BLOCK, BANDS)
        count = int(np.prod(shape))
        try:
            sym = range_decode(payload[head:], _band_model(scales, count, self.config.support))
        except DecodeError as e:
            raise DecodeError(e.reason, offset=head + (e.offset or 0)) from e
        return reconstruct(_coefficients(sym.reshape(shape)), step, index)


def builtin_intra_stub(frame: Frame, quality: int) -> Tuple[bytes, Frame]:
    return IntraStub().encode(frame, quality)
