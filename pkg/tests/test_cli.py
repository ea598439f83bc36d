import torch

from arcodec.model import ArtifactCodec, save_codec
from core.config import CodecConfig, VfiConfig
from core.frame import Frame
from main import main
from metrics_eval.curves import RDCurve, RDPoint, write_curves
from video_io.sequence import list_images, load_image, save_image, write_sequence
from vfi.backend import PyramidFlowBackend, save_backend


def _curves(path, scale=1.0):
    points = [RDPoint(r * scale, q, s) for r, q, s in
              zip([0.1, 0.2, 0.4, 0.8], [30.0, 33.0, 36.0, 39.0], [0.9, 0.93, 0.95, 0.97])]
    return write_curves([RDCurve("desk", points)], path)


def test_bdrate_identical_curves(tmp_path, capsys):
    anchor = _curves(tmp_path / "anchor.csv")
    test = _curves(tmp_path / "same.csv")
    assert main(["bdrate", str(anchor), str(test)]) == 0
    assert "0.0%" in capsys.readouterr().out


def test_report_command(tmp_path, capsys):
    curves = _curves(tmp_path / "c.csv")
    assert main(["report", "--input", str(curves), "--output", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out").is_dir()


def test_yuv_without_dimensions_is_rejected(tmp_path, capsys):
    (tmp_path / "seq.yuv").write_bytes(bytes(96))
    code = main(["encode", "--input", str(tmp_path / "seq.yuv"), "--output", str(tmp_path / "x.ibvc")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_encode_decode_roundtrip(tmp_path, capsys, toy_frames):
    torch.manual_seed(0)
    vfi = save_backend(PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8))), tmp_path / "vfi.pt")
    codec = save_codec(ArtifactCodec(CodecConfig.tiny()), tmp_path / "codec.pt", lambda_id=2)
    write_sequence(toy_frames, tmp_path / "in")
    stream = tmp_path / "seq.ibvc"
    assert main(["encode", "--input", str(tmp_path / "in"), "--pixel-format", "rgb_png_dir",
                 "--ckpt-vfi", str(vfi), "--ckpt-codec", str(codec), "--gop", "5",
                 "--output", str(stream)]) == 0
    out = capsys.readouterr().out
    assert "I:1 P:2 B:2" in out
    assert (tmp_path / "seq.csv").exists()
    assert main(["decode", "--input", str(stream), "--ckpt-vfi", str(vfi), "--ckpt-codec", str(codec),
                 "--output", str(tmp_path / "out")]) == 0
    assert len(list_images(tmp_path / "out")) == 5


def test_interp_with_untrained_backend_repeats_identical_frames(tmp_path, capsys):
    """Zero flows and an even occlusion split reproduce a repeated frame exactly."""
    torch.manual_seed(1)
    vfi = save_backend(PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8))), tmp_path / "vfi.pt")
    frame = Frame((torch.rand(3, 40, 48) * 255).round() / 255)
    save_image(frame, tmp_path / "a.png")
    save_image(frame, tmp_path / "b.png")
    out = tmp_path / "mid.png"
    assert main(["interp", "--input", str(tmp_path / "a.png"), str(tmp_path / "b.png"),
                 "--ckpt-vfi", str(vfi), "--output", str(out)]) == 0
    assert torch.equal(load_image(out).pixels, load_image(tmp_path / "a.png").pixels)


def test_missing_checkpoint_names_path(tmp_path, capsys):
    save_image(Frame(torch.zeros(3, 16, 16)), tmp_path / "a.png")
    missing = tmp_path / "nowhere.pt"
    code = main(["interp", "--input", str(tmp_path / "a.png"), str(tmp_path / "a.png"),
                 "--ckpt-vfi", str(missing), "--output", str(tmp_path / "mid.png")])
    assert code == 2
    assert str(missing) in capsys.readouterr().err


def test_interp_only_stream_decodes_without_codec(tmp_path, capsys, toy_frames):
    """Streams with empty B payloads are recognised from the header hash; no codec is needed."""
    torch.manual_seed(0)
    vfi = save_backend(PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8))), tmp_path / "vfi.pt")
    codec = save_codec(ArtifactCodec(CodecConfig.tiny()), tmp_path / "codec.pt", lambda_id=2)
    write_sequence(toy_frames, tmp_path / "in")
    stream = tmp_path / "seq.ibvc"
    assert main(["encode", "--input", str(tmp_path / "in"), "--pixel-format", "rgb_png_dir",
                 "--ckpt-vfi", str(vfi), "--gop", "5", "--b-mode", "interp_only",
                 "--output", str(stream)]) == 0
    assert "B 0" in capsys.readouterr().out
    assert main(["decode", "--input", str(stream), "--ckpt-vfi", str(vfi),
                 "--output", str(tmp_path / "out")]) == 0
    assert len(list_images(tmp_path / "out")) == 5
    # a codec checkpoint on the command line is ignored for such streams
    assert main(["decode", "--input", str(stream), "--ckpt-vfi", str(vfi), "--ckpt-codec", str(codec),
                 "--output", str(tmp_path / "again")]) == 0
    assert len(list_images(tmp_path / "again")) == 5
