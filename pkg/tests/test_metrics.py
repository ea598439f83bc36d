import math

import pytest
import torch

from core.config import GopConfig
from core.errors import ContractError, EvaluationError
from core.frame import Frame
from metrics_eval.bdrate import bd_rate
from metrics_eval.curves import INTERP_ONLY_LABEL, RDCurve, RDPoint, read_curves, write_curves
from metrics_eval.evaluate import evaluate_ladder, evaluate_sequence
from metrics_eval.quality import MS_SSIM_FLOOR, bpp, ms_ssim, psnr
from metrics_eval.report import bd_table, emit_report, format_bd_table

RATES = [0.1, 0.2, 0.4, 0.8]
PSNRS = [30.0, 33.0, 36.0, 39.0]
SSIMS = [0.90, 0.93, 0.95, 0.97]


def _curve(label="desk", scale=1.0, rates=RATES):
    return RDCurve(label, [RDPoint(r * scale, q, s) for r, q, s in zip(rates, PSNRS, SSIMS)])


def test_psnr_reference_values():
    x = torch.zeros(3, 8, 8)
    assert psnr(x, x) == 100.0
    assert psnr(x, x + 0.1) == pytest.approx(20.0, abs=1e-5)
    assert psnr(x, torch.ones(3, 8, 8)) == 0.0


def test_psnr_shape_mismatch():
    with pytest.raises(ContractError):
        psnr(torch.zeros(3, 8, 8), torch.zeros(3, 8, 9))


def test_ms_ssim_identical_and_symmetric():
    torch.manual_seed(0)
    a = Frame(torch.rand(3, 192, 192))
    b = Frame((a.pixels + 0.05 * torch.randn(3, 192, 192)).clamp(0, 1))
    assert ms_ssim(a, a) == 1.0
    assert ms_ssim(a, b) == pytest.approx(ms_ssim(b, a), abs=1e-9)


def test_ms_ssim_independent_noise():
    gen = torch.Generator().manual_seed(1)
    a, b = torch.rand(3, 192, 192, generator=gen), torch.rand(3, 192, 192, generator=gen)
    assert ms_ssim(a, b) < 0.5


def test_ms_ssim_small_frames_use_fewer_scales():
    gen = torch.Generator().manual_seed(2)
    a, b = torch.rand(3, 64, 64, generator=gen), torch.rand(3, 64, 64, generator=gen)
    assert ms_ssim(a, b) < 0.5
    assert ms_ssim(a, b) == pytest.approx(ms_ssim(b, a), abs=1e-9)
    with pytest.raises(ContractError):
        ms_ssim(torch.rand(3, 8, 8), torch.rand(3, 8, 8))


def test_bpp_definition():
    assert bpp(4096, 64, 64) == 1.0
    assert bpp(4096, 64, 64, num_frames=4) == 0.25
    with pytest.raises(ContractError):
        bpp(1, 0, 64)


def test_rd_point_validation():
    with pytest.raises(EvaluationError):
        RDPoint(-0.1, 30.0, 0.9)
    with pytest.raises(EvaluationError):
        RDPoint(0.1, 30.0, 1.5)
    with pytest.raises(EvaluationError):
        RDPoint(0.0, 30.0, 0.9)


def test_zero_rate_only_for_interp_only_points(tmp_path):
    point = RDPoint(0.0, 28.0, 0.9, interp_only=True)
    assert point == RDPoint(0.0, 28.0, 0.9, interp_only=True)
    with pytest.raises(EvaluationError):
        RDPoint(-0.1, 28.0, 0.9, interp_only=True)
    path = write_curves([RDCurve(f"{INTERP_ONLY_LABEL} (b-only)", [point])], tmp_path / "base.csv")
    (curve,) = read_curves(path)
    assert curve.points[0].interp_only and curve.points[0].bpp == 0.0
    path.write_text(path.read_text().replace(INTERP_ONLY_LABEL, "ibvc"))
    with pytest.raises(EvaluationError):
        read_curves(path)


def test_ms_ssim_of_inverted_pattern_stays_positive():
    """Anti-correlated frames hit the floor rather than zero, so the point is still valid."""
    board = ((torch.arange(64)[:, None] + torch.arange(64)[None, :]) % 2).float().expand(3, 64, 64)
    value = ms_ssim(board, 1.0 - board)
    assert value == MS_SSIM_FLOOR
    assert RDPoint(0.1, psnr(board, 1.0 - board), value).ms_ssim > 0


def test_bd_rate_identical_curves():
    assert bd_rate(_curve(), _curve()) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("fit", ["cubic", "pchip"])
def test_bd_rate_constant_offsets(fit):
    assert bd_rate(_curve(), _curve(scale=2.0), fit=fit) == pytest.approx(100.0, abs=0.1)
    assert bd_rate(_curve(), _curve(scale=0.5), fit=fit) == pytest.approx(-50.0, abs=0.1)


def test_bd_rate_reciprocity():
    a = bd_rate(_curve(), _curve(scale=1.3))
    b = bd_rate(_curve(scale=1.3), _curve())
    assert (1 + a / 100) * (1 + b / 100) == pytest.approx(1.0, rel=5e-3)
    assert b < 0


def test_bd_rate_ms_ssim_metric():
    assert bd_rate(_curve(), _curve(scale=2.0), metric="ms-ssim") == pytest.approx(100.0, abs=0.1)


def test_bd_rate_errors():
    short = RDCurve("short", [RDPoint(0.1, 30, 0.9), RDPoint(0.2, 31, 0.91)])
    with pytest.raises(EvaluationError):
        bd_rate(_curve(), short)
    far = RDCurve("far", [RDPoint(r, q + 50, s) for r, q, s in zip(RATES, PSNRS, SSIMS)])
    with pytest.raises(EvaluationError):
        bd_rate(_curve(), far)


def test_curve_csv_roundtrip(tmp_path):
    curves = [_curve("a"), _curve("b", scale=1.7)]
    back = read_curves(write_curves(curves, tmp_path / "c.csv"))
    assert [c.label for c in back] == ["a", "b"]
    for orig, got in zip(curves, back):
        assert orig.points == got.points


def test_report_files_are_deterministic(tmp_path):
    curves = [_curve("a"), _curve("b", scale=0.8)]
    first = emit_report(curves, tmp_path / "one")
    second = emit_report(curves, tmp_path / "two")
    assert first["csv"].read_bytes() == second["csv"].read_bytes()
    assert first["psnr"].exists() and first["msssim"].exists()


def test_empty_report(tmp_path):
    with pytest.raises(EvaluationError):
        emit_report([], tmp_path)


def test_bd_table_formatting(tmp_path):
    anchor = write_curves([_curve("desk")], tmp_path / "anchor.csv")
    test = write_curves([_curve("desk", scale=0.5)], tmp_path / "ibvc.csv")
    table = bd_table(anchor, [test])
    assert table["desk"]["ibvc"] == pytest.approx(-50.0, abs=0.1)
    assert "-50.0%" in format_bd_table(table)


def test_sequence_evaluation(tiny_models, toy_frames):
    gop = GopConfig(gop_size=5, n_bframes=1)
    point = evaluate_sequence(toy_frames, tiny_models, gop)
    b_only = evaluate_sequence(toy_frames, tiny_models, gop, accounting="b-only")
    assert point.bpp > 0 and b_only.bpp > 0
    assert 0 < point.ms_ssim <= 1
    with pytest.raises(EvaluationError):
        evaluate_sequence(toy_frames, tiny_models, gop, accounting="frames")


def test_ladder_evaluation_pairs_baseline(tiny_models, toy_frames):
    result = evaluate_ladder(toy_frames, [tiny_models], GopConfig(gop_size=5, n_bframes=1))
    assert len(result.curve) == 1 and len(result.baseline) == 1
    assert result.baseline[0].bpp < result.curve.points[0].bpp
    assert not math.isnan(result.psnr_gains()[0])


def test_b_only_interpolation_baseline_has_zero_rate(tiny_models, toy_frames):
    gop = GopConfig(gop_size=5, n_bframes=1, b_mode="interp_only")
    point = evaluate_sequence(toy_frames, tiny_models, gop, accounting="b-only")
    assert point.bpp == 0.0 and point.interp_only
    assert evaluate_sequence(toy_frames, tiny_models, gop).bpp > 0
