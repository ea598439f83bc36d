#!/usr/bin/env python3
"""
Bitstream container: fixed header followed by one chunk per frame in coding order.

Header  "<4sBHHHBBB32s": magic, version, width, height, num_frames, gop_size,
        N, lambda_id, model hash (width/height are the unpadded size)
Chunk   "<HBI": frame_index, coding type (I=0, P=1, B=2), payload length,
        then the payload and a little-endian CRC-32 of the payload
"""

import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Tuple, Union

from core.errors import ContractError, DecodeError
from core.frame import CodingType

MAGIC = b"IBVC"
VERSION = 1
HASH_BYTES = 32

_HEADER = struct.Struct("<4sBHHHBBB32s")
_CHUNK = struct.Struct("<HBI")
_CRC = struct.Struct("<I")

HEADER_BYTES = _HEADER.size


@dataclass(frozen=True)
class BitstreamHeader:
    width: int
    height: int
    num_frames: int
    gop_size: int
    n_bframes: int
    lambda_id: int
    model_hash: bytes

    def pack(self) -> bytes:
        if len(self.model_hash) != HASH_BYTES:
            raise ContractError(f"model hash must be {HASH_BYTES} bytes, got {len(self.model_hash)}")
        try:
            return _HEADER.pack(MAGIC, VERSION, self.width, self.height, self.num_frames,
                                self.gop_size, self.n_bframes, self.lambda_id, self.model_hash)
        except struct.error as e:
            raise ContractError(f"header field out of range: {e}") from e

    @classmethod
    def unpack(cls, data: bytes) -> "BitstreamHeader":
        if len(data) < HEADER_BYTES:
            raise DecodeError(f"header needs {HEADER_BYTES} bytes, got {len(data)}", offset=len(data))
        magic, version, w, h, n, gop, nb, lid, digest = _HEADER.unpack_from(data, 0)
        if magic != MAGIC:
            raise DecodeError(f"bad magic {magic!r}", offset=0)
        if version != VERSION:
            raise DecodeError(f"unsupported bitstream version {version}", offset=4)
        if w == 0 or h == 0 or n == 0:
            raise DecodeError(f"empty sequence in header ({w}x{h}, {n} frames)", offset=5)
        return cls(w, h, n, gop, nb, lid, digest)


@dataclass(frozen=True)
class FrameChunk:
    frame_index: int
    coding_type: CodingType
    payload: bytes

    @property
    def bits(self) -> int:
        return 8 * len(self.payload)

    def pack(self) -> bytes:
        try:
            head = _CHUNK.pack(self.frame_index, self.coding_type.code, len(self.payload))
        except struct.error as e:
            raise ContractError(f"chunk field out of range: {e}") from e
        return head + self.payload + _CRC.pack(zlib.crc32(self.payload))


def read_chunk(data: bytes, pos: int) -> Tuple[FrameChunk, int]:
    """Parse the chunk at ``pos``; return (chunk, next position)."""
    if pos + _CHUNK.size > len(data):
        raise DecodeError("truncated chunk header", offset=pos)
    index, code, length = _CHUNK.unpack_from(data, pos)
    start = pos + _CHUNK.size
    end = start + length
    if end + _CRC.size > len(data):
        raise DecodeError(f"chunk for frame {index} truncated", offset=len(data))
    try:
        ctype = CodingType.from_code(code)
    except ValueError:
        raise DecodeError(f"unknown coding type code {code}", offset=pos + 2) from None
    payload = bytes(data[start:end])
    (crc,) = _CRC.unpack_from(data, end)
    if crc != zlib.crc32(payload):
        raise DecodeError(f"checksum mismatch in chunk for frame {index}", offset=end)
    return FrameChunk(index, ctype, payload), end + _CRC.size


def iter_chunks(data: bytes, pos: int = HEADER_BYTES) -> Iterator[FrameChunk]:
    """Lazily parse chunks so earlier frames can be decoded before a corrupt one."""
    while pos < len(data):
        chunk, pos = read_chunk(data, pos)
        yield chunk


@dataclass
class Bitstream:
    header: BitstreamHeader
    chunks: List[FrameChunk] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        return self.header.pack() + b"".join(c.pack() for c in self.chunks)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bitstream":
        return cls(BitstreamHeader.unpack(data), list(iter_chunks(data)))

    @property
    def payload_bits(self) -> int:
        """Coded payload bits; header, chunk framing and CRCs excluded."""
        return sum(c.bits for c in self.chunks)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "Bitstream":
        return cls.from_bytes(Path(path).read_bytes())
