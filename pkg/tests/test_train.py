import numpy as np
import pytest
import torch

from arcodec.model import ArtifactCodec, load_codec
from core.config import CodecConfig, TrainConfig, VfiConfig, id_for_lambda, lambda_for_id, ladder_ids
from core.errors import ConfigurationError, ContractError, TrainingAbort
from metrics_eval.bdrate import bd_rate
from train.corpus import ClipDataset, SyntheticClipDataset, write_desk_corpus
from train.gradcheck import check_input_gradient, check_parameter_groups, tiny_problem
from train.losses import rd_loss
from train.trainer import build_state, fit, forward_sample, train_step
from vfi.backend import PyramidFlowBackend
from .conftest import slow


def _small_backend():
    torch.manual_seed(0)
    return PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8)))


def test_perfect_reconstruction_costs_nothing():
    x = torch.rand(2, 3, 16, 16)
    terms = rd_loss([x, x], [x, x], [torch.zeros(2), torch.zeros(2)], 256.0)
    assert float(terms.loss) == 0.0


def test_reference_loss_value():
    x = torch.zeros(1, 3, 8, 8)
    x_hat = torch.full((1, 3, 8, 8), 0.1)
    terms = rd_loss([x, x], [x_hat, x_hat], [torch.tensor(0.1), torch.tensor(0.1)], 256.0)
    assert float(terms.loss) == pytest.approx(2.66, rel=1e-5)


def test_loss_symmetric_in_targets():
    torch.manual_seed(0)
    xs = [torch.rand(1, 3, 8, 8) for _ in range(4)]
    a = rd_loss([xs[0], xs[1]], [xs[2], xs[3]], [torch.tensor(0.3), torch.tensor(0.7)], 512.0)
    b = rd_loss([xs[1], xs[0]], [xs[3], xs[2]], [torch.tensor(0.7), torch.tensor(0.3)], 512.0)
    assert float(a.loss) == float(b.loss)


def test_loss_increases_with_rate_and_distortion():
    x = torch.zeros(1, 3, 8, 8)
    base = float(rd_loss([x], [x + 0.1], [torch.tensor(0.1)], 256.0).loss)
    assert float(rd_loss([x], [x + 0.1], [torch.tensor(0.2)], 256.0).loss) > base
    assert float(rd_loss([x], [x + 0.2], [torch.tensor(0.1)], 256.0).loss) > base


def test_non_finite_loss_aborts():
    x = torch.zeros(1, 3, 8, 8)
    with pytest.raises(TrainingAbort):
        rd_loss([x], [x * float("nan")], [torch.tensor(0.1)], 256.0)
    with pytest.raises(ConfigurationError):
        rd_loss([x, x], [x], [torch.tensor(0.1)], 256.0)


def test_lambda_ladder_is_a_bijection():
    ids = ladder_ids("mse") + ladder_ids("ms-ssim")
    assert len(ids) == 8
    for lid in ids:
        assert id_for_lambda(*lambda_for_id(lid)) == lid
    assert [lambda_for_id(i)[1] for i in ladder_ids("mse")] == [256.0, 512.0, 1024.0, 2048.0]


def test_desk_corpus_on_disk(tmp_path):
    write_desk_corpus(tmp_path, num_clips=2, size=64, seed=1)
    dataset = ClipDataset(tmp_path, crop=64)
    assert len(dataset) == 2
    assert dataset[0].shape == (5, 3, 64, 64)
    (tmp_path / "empty").mkdir()
    with pytest.raises(ConfigurationError):
        ClipDataset(tmp_path / "empty", crop=64)


def test_forward_sample_single_target():
    codec = ArtifactCodec(CodecConfig.tiny())
    batch = SyntheticClipDataset(2, 64, seed=0).samples
    config = TrainConfig(T=1, crop=64)
    terms = forward_sample(torch.stack(batch), codec, _small_backend(), config, torch.Generator().manual_seed(0))
    assert terms.loss.dim() == 0
    with pytest.raises(ContractError):
        forward_sample(torch.rand(1, 3, 3, 64, 64), codec, _small_backend(), config)


def test_frozen_parameters_give_identical_losses():
    """No trainable parameters: no update, same noise, same loss."""
    torch.manual_seed(0)
    codec = ArtifactCodec(CodecConfig.tiny())
    codec.requires_grad_(False)
    config = TrainConfig(crop=64, batch=2)
    state = build_state(codec, _small_backend(), config)
    assert state.optimizer is None
    batch = torch.stack(SyntheticClipDataset(2, 64, seed=0).samples)
    first = train_step(batch, state, config)
    second = train_step(batch, state, config)
    assert first.loss == second.loss
    assert state.step == 0


def test_fit_writes_log(tmp_path):
    torch.manual_seed(0)
    config = TrainConfig(crop=64, batch=2, epochs_main=1, epochs_finetune=1, max_steps=3)
    state = build_state(ArtifactCodec(CodecConfig.tiny()), _small_backend(), config)
    history = fit(state, SyntheticClipDataset(4, 64, seed=0), config, tmp_path / "log.csv")
    assert len(history) == 3
    lines = (tmp_path / "log.csv").read_text().splitlines()
    assert lines[0] == "step,loss,rate_bpp,distortion"
    assert len(lines) == 4


def test_gradients_match_finite_differences():
    problem = tiny_problem(seed=0)
    for result in check_parameter_groups(problem):
        assert result.rel_error < 1e-3, result
    assert check_input_gradient(problem).rel_error < 1e-3


@slow
def test_training_reduces_loss():
    torch.manual_seed(0)
    config = TrainConfig(lambda_id=2, crop=64, batch=4, epochs_main=50, epochs_finetune=0, max_steps=200)
    dataset = SyntheticClipDataset(16, 64, seed=0)
    state = build_state(ArtifactCodec(CodecConfig.tiny()), _small_backend(), config)
    history = fit(state, dataset, config)
    assert np.mean([m.loss for m in history[-10:]]) < history[0].loss


@slow
def test_ladder_is_monotone(tmp_path, toy_frames):
    from core.config import GopConfig
    from metrics_eval.evaluate import evaluate_ladder
    from pipeline.models import CodecModels
    from train.ladder import build_model_ladder

    backend = _small_backend()
    config = TrainConfig(crop=64, batch=4, epochs_main=20, epochs_finetune=0, max_steps=300)
    paths = build_model_ladder(backend, SyntheticClipDataset(16, 64, seed=0), config, "mse",
                               CodecConfig.tiny(), tmp_path)
    ladder = []
    for lid, path in sorted(paths.items()):
        codec, meta = load_codec(path)
        assert meta["lambda_id"] == lid
        ladder.append(CodecModels(backend, codec, lid))
    curve = evaluate_ladder(toy_frames, ladder, GopConfig(gop_size=5, n_bframes=1), "b-only").curve
    assert len(curve) == 4
    assert all(b.psnr_db > a.psnr_db for a, b in zip(curve.points, curve.points[1:]))
    assert bd_rate(curve, curve) == pytest.approx(0.0, abs=1e-9)
