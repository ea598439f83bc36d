import pytest

from core.errors import ContractError, DecodeError
from core.frame import CodingType
from pipeline.bitstream import HEADER_BYTES, Bitstream, BitstreamHeader, FrameChunk, read_chunk


def _stream():
    header = BitstreamHeader(176, 144, 3, 32, 1, 2, bytes(range(32)))
    chunks = [FrameChunk(0, CodingType.I, b"\x01\x02\x03"),
              FrameChunk(2, CodingType.P, b""),
              FrameChunk(1, CodingType.B, bytes(300))]
    return Bitstream(header, chunks)


def test_roundtrip_and_payload_bits(tmp_path):
    stream = _stream()
    back = Bitstream.read(stream.write(tmp_path / "a.ibvc"))
    assert back == stream
    assert back.payload_bits == 8 * 303


def test_header_layout():
    data = _stream().header.pack()
    assert len(data) == HEADER_BYTES
    assert data[:4] == b"IBVC"


def test_header_field_overflow():
    with pytest.raises(ContractError):
        BitstreamHeader(70000, 144, 3, 32, 1, 2, bytes(32)).pack()
    with pytest.raises(ContractError):
        BitstreamHeader(176, 144, 3, 32, 1, 2, bytes(8)).pack()


def test_bad_magic_and_short_header():
    data = bytearray(_stream().to_bytes())
    with pytest.raises(DecodeError):
        BitstreamHeader.unpack(bytes(data[:10]))
    data[0:4] = b"XXXX"
    with pytest.raises(DecodeError):
        BitstreamHeader.unpack(bytes(data))


def test_corrupted_payload_fails_checksum():
    data = bytearray(_stream().to_bytes())
    data[HEADER_BYTES + 8] ^= 0xFF
    with pytest.raises(DecodeError):
        read_chunk(bytes(data), HEADER_BYTES)


def test_truncated_chunk():
    data = _stream().to_bytes()
    with pytest.raises(DecodeError):
        Bitstream.from_bytes(data[:-1])
