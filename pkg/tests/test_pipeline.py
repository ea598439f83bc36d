import pytest
import torch

from arcodec.model import ArtifactCodec
from core.config import CodecConfig, GopConfig
from core.errors import ConfigurationError, ContractError, DecodeError
from core.frame import Frame
from pipeline.bitstream import HEADER_BYTES, Bitstream
from pipeline.codec import decode_sequence, encode_sequence
from pipeline.models import CodecModels

GOP5 = GopConfig(gop_size=5, n_bframes=1)


def test_chunks_follow_coding_order(tiny_models, toy_frames):
    result = encode_sequence(toy_frames, tiny_models, GOP5)
    assert [c.frame_index for c in result.bitstream.chunks] == [0, 2, 4, 1, 3]
    assert [s.coding_type for s in result.stats] == ["I", "P", "P", "B", "B"]


def test_decode_is_bit_exact(tiny_models, toy_frames):
    result = encode_sequence(toy_frames, tiny_models, GOP5)
    decoded = decode_sequence(result.to_bytes(), tiny_models)
    assert len(decoded.frames) == 5
    for enc, dec in zip(result.reconstructions, decoded.frames):
        assert torch.equal(enc.pixels, dec.pixels)
    assert decoded.prior_digests == result.prior_digests
    assert len(result.prior_digests) == 2


def test_encoding_is_deterministic(tiny_models, toy_frames):
    first = encode_sequence(toy_frames, tiny_models, GOP5).to_bytes()
    assert encode_sequence(toy_frames, tiny_models, GOP5).to_bytes() == first


def test_bpp_accounting(tiny_models, toy_frames):
    result = encode_sequence(toy_frames, tiny_models, GOP5)
    for stat, chunk in zip(result.stats, result.bitstream.chunks):
        assert stat.bits == chunk.bits
        assert stat.bpp == chunk.bits / (64 * 64)
    assert result.bpp == result.total_bits / (5 * 64 * 64)
    assert sum(result.bits_by_type().values()) == result.total_bits


def test_unaligned_frames_are_cropped_back(tiny_models):
    torch.manual_seed(0)
    frames = [Frame(torch.rand(3, 40, 72), i) for i in range(3)]
    result = encode_sequence(frames, tiny_models, GopConfig(gop_size=3, n_bframes=1))
    decoded = decode_sequence(result.to_bytes(), tiny_models)
    assert all(f.size == (40, 72) for f in decoded.frames)
    assert result.bitstream.header.width == 72


def test_deleted_b_chunk_names_the_frame(tiny_models, toy_frames):
    """Missing B chunk fails at that frame; earlier frames stay decodable."""
    result = encode_sequence(toy_frames, tiny_models, GOP5)
    stream = result.bitstream
    kept = [c for c in stream.chunks if c.frame_index != 1]
    data = Bitstream(stream.header, kept).to_bytes()
    with pytest.raises(DecodeError) as info:
        decode_sequence(data, tiny_models)
    assert info.value.frame_index == 1
    assert [f.index for f in info.value.decoded] == [0, 2, 4]
    for frame in info.value.decoded:
        assert torch.equal(frame.pixels, result.reconstructions[frame.index].pixels)


def test_corrupt_chunk_is_localized(tiny_models, toy_frames):
    data = bytearray(encode_sequence(toy_frames, tiny_models, GOP5).to_bytes())
    data[-6] ^= 0x55
    with pytest.raises(DecodeError) as info:
        decode_sequence(bytes(data), tiny_models)
    assert info.value.frame_index == 3


def test_truncated_stream(tiny_models, toy_frames):
    data = encode_sequence(toy_frames, tiny_models, GOP5).to_bytes()
    with pytest.raises(DecodeError):
        decode_sequence(data[:HEADER_BYTES + 20], tiny_models)


def test_model_hash_mismatch(tiny_models, toy_frames):
    data = encode_sequence(toy_frames, tiny_models, GOP5).to_bytes()
    torch.manual_seed(99)
    other = CodecModels(tiny_models.backend, ArtifactCodec(CodecConfig.tiny()), lambda_id=2).eval()
    with pytest.raises(ConfigurationError):
        decode_sequence(data, other)


def test_interp_only_mode(tiny_models, toy_frames):
    config = GopConfig(gop_size=5, n_bframes=1, b_mode="interp_only")
    result = encode_sequence(toy_frames, tiny_models, config)
    b_chunks = [c for c in result.bitstream.chunks if c.coding_type.value == "B"]
    assert all(c.payload == b"" for c in b_chunks)
    decoded = decode_sequence(result.to_bytes(), tiny_models)
    assert torch.equal(decoded.frames[1].pixels, result.reconstructions[1].pixels)


def test_prior_buffer_resets_per_gop(tiny_models):
    """gop 4, N=3: two GoPs of three B frames, prior emptied between them."""
    torch.manual_seed(1)
    frames = [Frame(torch.rand(3, 64, 64), i) for i in range(9)]
    result = encode_sequence(frames, tiny_models, GopConfig(gop_size=4, n_bframes=3))
    decoded = decode_sequence(result.to_bytes(), tiny_models)
    assert decoded.prior_digests == result.prior_digests
    assert len(result.prior_digests) == 6


def test_out_of_range_input(tiny_models):
    frames = [Frame(torch.full((3, 64, 64), 1.5), 0)]
    with pytest.raises(ContractError):
        encode_sequence(frames, tiny_models)


def test_empty_sequence(tiny_models):
    with pytest.raises(ContractError):
        encode_sequence([], tiny_models)
