#!/usr/bin/env python3
"""
Carry-less range coder with 64-bit integer state and 16-bit frequencies.

Renormalization follows Subbotin's scheme (TOP = 2^56, BOT = 2^48): a byte is
shifted out whenever the top byte of the interval is settled, and the range is
truncated to the next BOT boundary when it gets too small. All state is plain
Python integers, so encoder and decoder agree on every platform.

Each finished stream is framed as ``varint(len) + body``; the decoder pads the
body with zeros and checks that the body length matches what the encoder
emitted, so truncation is reported instead of decoding garbage.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np

from core.errors import ContractError, DecodeError
from .symbol_model import PRECISION, SymbolModel

logger = logging.getLogger(__name__)

_MASK = (1 << 64) - 1
_TOP = 1 << 56
_BOT = 1 << 48
_FLUSH_MAX = 8

ESCAPE_LENGTH_BITS = 6
RAW_CHUNK_BITS = 16
CHUNK_ROWS = 4096


def encode_varint(n: int) -> bytes:
    if n < 0:
        raise ContractError(f"varint must be non-negative, got {n}")
    out = bytearray()
    while True:
        byte = n & 0x7F
        n >>= 7
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varint(data: bytes, pos: int = 0) -> Tuple[int, int]:
    shift = 0
    value = 0
    start = pos
    while True:
        if pos >= len(data):
            raise DecodeError("truncated length prefix", offset=start)
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7
        if shift > 63:
            raise DecodeError("length prefix too long", offset=start)


def split_stream(data: bytes, pos: int = 0) -> Tuple[bytes, int]:
    """Read one length-prefixed stream starting at ``pos``; return (body, next_pos)."""
    length, body_start = decode_varint(data, pos)
    end = body_start + length
    if end > len(data):
        raise DecodeError(f"stream declares {length} bytes, only {len(data) - body_start} present",
                          offset=len(data))
    return bytes(data[body_start:end]), end


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = _MASK
        self._out = bytearray()
        self.escapes = 0

    def encode(self, start: int, size: int, precision: int = PRECISION) -> None:
        r = self.range >> precision
        self.low += r * start
        self.range = r * size
        low, rng, out = self.low, self.range, self._out
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = (-low) & (_BOT - 1)
            else:
                break
            out.append((low >> 56) & 0xFF)
            low = (low << 8) & _MASK
            rng = (rng << 8) & _MASK
        self.low, self.range = low, rng

    def encode_bits(self, value: int, nbits: int) -> None:
        """Uniform raw bits, at most 16 per call."""
        if nbits:
            self.encode(value, 1, nbits)

    def encode_raw(self, value: int) -> None:
        """Escape payload: bit length, sign, magnitude."""
        mag = abs(value)
        nbits = mag.bit_length()
        if nbits >= 1 << ESCAPE_LENGTH_BITS:
            raise ContractError(f"escape value {value} too large")
        self.encode_bits(nbits, ESCAPE_LENGTH_BITS)
        self.encode_bits(1 if value < 0 else 0, 1)
        while nbits > 0:
            take = min(nbits, RAW_CHUNK_BITS)
            nbits -= take
            self.encode_bits((mag >> nbits) & ((1 << take) - 1), take)

    def encode_symbols(self, values: Sequence[int], model: SymbolModel) -> None:
        values = np.asarray(values, dtype=np.int64).reshape(-1)
        if len(values) != len(model):
            raise ContractError(f"{len(values)} symbols but {len(model)} models")
        for lo in range(0, len(values), CHUNK_ROWS):
            hi = min(lo + CHUNK_ROWS, len(values))
            tables = model.chunk(lo, hi)
            k = values[lo:hi] - tables.offsets
            nvals = tables.value_bins
            inside = (k >= 0) & (k < nvals)
            if not model.escape and not inside.all():
                bad = int(values[lo + int(np.argmin(inside))])
                raise ContractError(f"symbol {bad} outside model support and no escape available")
            k_bin = np.where(inside, k, nvals)
            rows = np.arange(hi - lo)
            starts = tables.cdf[rows, k_bin].tolist()
            sizes = (tables.cdf[rows, k_bin + 1] - tables.cdf[rows, k_bin]).tolist()
            flags = inside.tolist()
            rel = k.tolist()
            offs = tables.offsets.tolist()
            for j in range(hi - lo):
                self.encode(starts[j], sizes[j], model.precision)
                if not flags[j]:
                    self.escapes += 1
                    self.encode_raw(rel[j] + offs[j])

    def finish(self) -> bytes:
        """Minimal flush: shortest prefix of a value inside [low, low + range)."""
        low, high = self.low, self.low + self.range
        for k in range(1, _FLUSH_MAX + 1):
            drop = 64 - 8 * k
            unit = 1 << drop
            v = ((low + unit - 1) >> drop) << drop
            if v < high and v <= _MASK:
                tail = (v >> drop).to_bytes(k, "big")
                break
        body = bytes(self._out) + tail
        if self.escapes:
            logger.debug("range coder emitted %d escape symbols", self.escapes)
        return body


class RangeDecoder:
    def __init__(self, body: bytes):
        self.data = body
        self.pos = 0
        self.low = 0
        self.range = _MASK
        self.code = 0
        self._r = 0
        for _ in range(8):
            self.code = (self.code << 8) | self._next_byte()

    def _next_byte(self) -> int:
        b = self.data[self.pos] if self.pos < len(self.data) else 0
        self.pos += 1
        return b

    def target(self, precision: int = PRECISION) -> int:
        self._r = self.range >> precision
        t = (self.code - self.low) // self._r
        if t < 0 or t >= (1 << precision):
            raise DecodeError("range decoder left the coding interval", offset=min(self.pos, len(self.data)))
        return t

    def consume(self, start: int, size: int) -> None:
        self.low += self._r * start
        self.range = self._r * size
        low, rng, code = self.low, self.range, self.code
        while True:
            if (low ^ (low + rng)) < _TOP:
                pass
            elif rng < _BOT:
                rng = (-low) & (_BOT - 1)
            else:
                break
            low = (low << 8) & _MASK
            rng = (rng << 8) & _MASK
            code = ((code << 8) & _MASK) | self._next_byte()
        self.low, self.range, self.code = low, rng, code

    def decode_bits(self, nbits: int) -> int:
        if not nbits:
            return 0
        t = self.target(nbits)
        self.consume(t, 1)
        return t

    def decode_raw(self) -> int:
        nbits = self.decode_bits(ESCAPE_LENGTH_BITS)
        negative = self.decode_bits(1)
        mag = 0
        while nbits > 0:
            take = min(nbits, RAW_CHUNK_BITS)
            nbits -= take
            mag = (mag << take) | self.decode_bits(take)
        return -mag if negative else mag

    def decode_symbols(self, model: SymbolModel) -> np.ndarray:
        out = np.empty(len(model), dtype=np.int64)
        for lo in range(0, len(model), CHUNK_ROWS):
            hi = min(lo + CHUNK_ROWS, len(model))
            tables = model.chunk(lo, hi)
            nvals = tables.value_bins.tolist()
            offs = tables.offsets.tolist()
            for j in range(hi - lo):
                row = tables.cdf[j]
                t = self.target(model.precision)
                k = int(np.searchsorted(row, t, side="right")) - 1
                start = int(row[k])
                self.consume(start, int(row[k + 1]) - start)
                if k < nvals[j]:
                    out[lo + j] = k + offs[j]
                elif model.escape and k == nvals[j]:
                    out[lo + j] = self.decode_raw()
                else:
                    raise DecodeError("decoded symbol outside the model", offset=min(self.pos, len(self.data)))
        return out

    def finish(self) -> None:
        """Check that the body length matches the encoder's byte count."""
        shifted = self.pos - 8
        flushed = len(self.data) - shifted
        if flushed < 1:
            raise DecodeError("stream truncated", offset=len(self.data))
        if flushed > _FLUSH_MAX:
            raise DecodeError(f"{flushed - _FLUSH_MAX} unexpected trailing bytes", offset=self.pos)


def range_encode(symbols: Sequence[int], models: SymbolModel) -> bytes:
    """Encode ``symbols`` (one model row each) into a length-prefixed stream."""
    enc = RangeEncoder()
    enc.encode_symbols(symbols, models)
    body = enc.finish()
    return encode_varint(len(body)) + body


def range_decode(data: bytes, models: SymbolModel) -> np.ndarray:
    body, end = split_stream(data, 0)
    if end != len(data):
        raise DecodeError(f"{len(data) - end} bytes after the coded stream", offset=end)
    dec = RangeDecoder(body)
    symbols = dec.decode_symbols(models)
    dec.finish()
    return symbols


def encoded_bits(streams: List[bytes]) -> int:
    """Coded payload bits of length-prefixed streams, prefixes excluded."""
    total = 0
    for s in streams:
        body, _ = split_stream(s, 0)
        total += 8 * len(body)
    return total
