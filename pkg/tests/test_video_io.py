import numpy as np
import pytest
import torch

from core.errors import ConfigurationError, MalformedInputError
from core.frame import Frame
from video_io.color import rgb_to_yuv, yuv_to_rgb
from video_io.padding import crop_to_original, pad_to_multiple, padded_size
from video_io.sequence import SequenceSpec, read_sequence, write_sequence


def _planes(h, w, y, u, v, chroma="420"):
    ch, cw = ((h + 1) // 2, (w + 1) // 2) if chroma == "420" else (h, w)
    return (np.full((h, w), y, np.uint8), np.full((ch, cw), u, np.uint8), np.full((ch, cw), v, np.uint8))


def test_white_and_black_conversion():
    white = yuv_to_rgb(*_planes(8, 8, 235, 128, 128))
    black = yuv_to_rgb(*_planes(8, 8, 16, 128, 128))
    assert torch.allclose(white.pixels, torch.ones(3, 8, 8), atol=1 / 255)
    assert torch.allclose(black.pixels, torch.zeros(3, 8, 8), atol=1 / 255)


def test_444_planes_are_not_resampled():
    frame = yuv_to_rgb(*_planes(6, 10, 100, 90, 160, chroma="444"))
    assert frame.pixels.shape == (3, 6, 10)


def test_inconsistent_planes_rejected():
    y = np.zeros((8, 8), np.uint8)
    with pytest.raises(MalformedInputError):
        yuv_to_rgb(y, np.zeros((3, 3), np.uint8), np.zeros((3, 3), np.uint8))
    with pytest.raises(MalformedInputError):
        yuv_to_rgb(y, np.zeros((4, 4), np.uint8), np.zeros((8, 8), np.uint8))


def test_high_bit_depth_unsupported():
    with pytest.raises(ConfigurationError):
        yuv_to_rgb(*_planes(4, 4, 16, 128, 128), bit_depth=10)


def test_rgb_yuv_rgb_stays_close():
    torch.manual_seed(0)
    frame = Frame(torch.rand(3, 16, 16) * 0.6 + 0.2)
    back = yuv_to_rgb(*rgb_to_yuv(frame, "444"))
    assert torch.allclose(back.pixels, frame.pixels, atol=3 / 255)


def test_read_black_yuv_file(tmp_path):
    path = tmp_path / "black.yuv"
    with open(path, "wb") as fh:
        for plane in _planes(16, 24, 0, 128, 128):
            fh.write(plane.tobytes())
    frames = read_sequence(path, SequenceSpec(width=24, height=16, num_frames=1))
    assert len(frames) == 1
    assert frames[0].pixels.shape == (3, 16, 24)
    assert float(frames[0].pixels.max()) <= 1 / 255


def test_short_yuv_file_rejected(tmp_path):
    spec = SequenceSpec(width=8, height=8, num_frames=2)
    path = tmp_path / "short.yuv"
    path.write_bytes(b"\x80" * (spec.frame_bytes * 2 - 1))
    with pytest.raises(MalformedInputError):
        read_sequence(path, spec)


def test_unknown_pixel_format():
    with pytest.raises(ConfigurationError):
        SequenceSpec(width=8, height=8, num_frames=1, pixel_format="nv12")


def test_png_directory_roundtrip(tmp_path):
    torch.manual_seed(1)
    frames = [Frame((torch.rand(3, 12, 20) * 255).round() / 255, i) for i in range(3)]
    write_sequence(frames, tmp_path / "clip")
    back = read_sequence(tmp_path / "clip", SequenceSpec(20, 12, 3, "rgb_png_dir"))
    for a, b in zip(frames, back):
        assert torch.allclose(a.pixels, b.pixels, atol=1e-6)


def test_pad_720p():
    frame = Frame(torch.rand(3, 720, 1280))
    padded = pad_to_multiple(frame)
    assert padded.size == (768, 1280)
    assert padded.original_size == (720, 1280)
    # replicate padding repeats the last row
    assert torch.equal(padded.pixels[:, 767], frame.pixels[:, 719])


def test_aligned_frame_unchanged():
    frame = Frame(torch.rand(3, 256, 256))
    assert pad_to_multiple(frame) is frame
    assert padded_size(256, 256) == (256, 256)


def test_crop_inverts_pad():
    frame = Frame(torch.rand(3, 50, 70), index=4)
    back = crop_to_original(pad_to_multiple(frame))
    assert torch.equal(back.pixels, frame.pixels)
    assert back.index == 4
