import math

import numpy as np
import pytest
import torch

from core.config import EntropyConfig
from core.errors import ConfigurationError, ContractError, DecodeError
from entropy.coding import compress_latents, decompress_latents, estimate_vs_actual
from entropy.gaussian import gaussian_likelihood
from entropy.hyperprior import EntropyModel, HyperLatent, model_likelihoods
from entropy.range_coder import encoded_bits, range_decode, range_encode
from entropy.symbol_model import TOTAL, GaussianSymbolModel, TableSymbolModel, laplace_model, split_means


def test_unit_gaussian_likelihood_at_zero():
    p = gaussian_likelihood(torch.zeros(1), torch.zeros(1), torch.ones(1))
    assert abs(float(p) - 0.3829) < 1e-4
    assert abs(-math.log2(float(p)) - 1.385) < 1e-3


def test_concentrated_mass_costs_nothing():
    p = gaussian_likelihood(torch.tensor([3.0]), torch.tensor([3.1]), torch.tensor([0.11]))
    assert -math.log2(float(p)) < 0.01


def test_empty_sequence_roundtrip():
    model = TableSymbolModel.uniform(4, 0)
    data = range_encode([], model)
    assert len(data) <= 4
    assert len(range_decode(data, model)) == 0


def test_symbol_count_mismatch():
    with pytest.raises(ContractError):
        range_encode([1, 2, 3], TableSymbolModel.uniform(4, 2))


def test_uniform_source_near_eight_bits():
    rng = np.random.default_rng(0)
    symbols = rng.integers(0, 256, 10_000)
    model = TableSymbolModel.uniform(256, len(symbols))
    data = range_encode(symbols, model)
    assert encoded_bits([data]) <= 8 * (10_000 * 1.002 + 16)
    assert np.array_equal(range_decode(data, model), symbols)


def test_skewed_binary_source():
    rng = np.random.default_rng(0)
    symbols = (rng.random(100_000) < 0.1).astype(np.int64)
    model = TableSymbolModel.from_pmf(np.array([0.9, 0.1]), np.array([0]),
                                      np.zeros(len(symbols), dtype=np.int64), escape=False)
    ideal = float(np.where(symbols == 0, -math.log2(0.9), -math.log2(0.1)).sum())
    data = range_encode(symbols, model)
    assert encoded_bits([data]) <= ideal * 1.01 + 128
    assert 0.46 < ideal / len(symbols) < 0.48


def test_random_tables_roundtrip_with_escapes():
    """Values outside each table's support go through the escape path."""
    rng = np.random.default_rng(1)
    for _ in range(1000):
        n_tables = int(rng.integers(1, 4))
        width = int(rng.integers(2, 12))
        pmf = rng.random((n_tables, width)) * 0.9 / width
        offsets = rng.integers(-5, 5, n_tables)
        count = int(rng.integers(1, 40))
        index = rng.integers(0, n_tables, count)
        model = TableSymbolModel.from_pmf(pmf, offsets, index)
        symbols = offsets[index] + rng.integers(-3, width + 3, count)
        assert np.array_equal(range_decode(range_encode(symbols, model), model), symbols)


@pytest.mark.parametrize("escape_mode", ["fixed", "tail"])
def test_gaussian_tables_roundtrip(escape_mode):
    rng = np.random.default_rng(2)
    sigma = rng.uniform(0.11, 20.0, 500)
    delta = rng.uniform(-0.5, 0.5, 500)
    model = GaussianSymbolModel(delta, sigma, support=16, escape_mode=escape_mode)
    symbols = np.round(rng.normal(0, sigma)).astype(np.int64)
    symbols[:5] = [200, -300, 17, -17, 5000]
    assert np.array_equal(range_decode(range_encode(symbols, model), model), symbols)


def test_gaussian_tables_are_normalised_with_fixed_escape():
    """Rows end at 2^16, every bin has a count and the escape bin holds 1/(2L)."""
    rng = np.random.default_rng(5)
    support = 64
    _, delta = split_means(rng.uniform(-20.0, 20.0, 400))
    sigma = np.exp(rng.uniform(np.log(0.11), np.log(200.0), 400))
    tables = GaussianSymbolModel(delta, sigma, support).tables()
    rows = np.arange(len(sigma))
    assert np.array_equal(tables.value_bins, np.full(len(sigma), 2 * support + 1))
    assert np.array_equal(tables.offsets, np.full(len(sigma), -support))
    nbins = tables.value_bins + 1
    assert (tables.cdf[rows, nbins] == TOTAL).all()
    counts = np.diff(tables.cdf, axis=1)
    assert (counts[:, :2 * support + 2] >= 1).all()
    assert (counts[:, :2 * support + 2].sum(axis=1) == TOTAL).all()
    escape = counts[rows, tables.value_bins]
    assert (np.abs(escape - TOTAL / (2 * support)) <= 2).all()


def test_gaussian_likelihood_sums_to_one():
    rng = np.random.default_rng(6)
    values = torch.arange(-400, 401, dtype=torch.float64)[:, None]
    means = torch.from_numpy(rng.uniform(-20.0, 20.0, 50))[None, :]
    scales = torch.from_numpy(np.exp(rng.uniform(np.log(0.11), np.log(40.0), 50)))[None, :]
    total = gaussian_likelihood(values, means, scales).sum(dim=0)
    assert float((total - 1.0).abs().max()) <= 2.0 ** -16


def test_tail_mode_narrows_support_for_small_scales():
    model = GaussianSymbolModel(np.zeros(2), np.array([0.2, 100.0]), support=64, escape_mode="tail")
    tables = model.tables()
    assert tables.value_bins.tolist() == [7, 129]


def test_unknown_escape_mode():
    with pytest.raises(ContractError):
        GaussianSymbolModel(np.zeros(1), np.ones(1), escape_mode="wide")
    with pytest.raises(ConfigurationError):
        EntropyConfig(escape_mode="wide").validate()


def test_laplace_tables_fixed_escape_mass():
    model = laplace_model(np.array([0.5, 4.0]), support=8, index=np.array([0, 1]))
    for row in range(2):
        escape = int(model.cdf[row, 18] - model.cdf[row, 17])
        assert abs(escape - TOTAL / 16) <= 2


def test_truncated_stream_raises():
    rng = np.random.default_rng(3)
    symbols = rng.integers(0, 16, 500)
    model = TableSymbolModel.uniform(16, 500)
    data = range_encode(symbols, model)
    with pytest.raises(DecodeError) as info:
        range_decode(data[:-1], model)
    assert info.value.offset is not None


def test_gaussian_model_rejects_bad_scale():
    with pytest.raises(ContractError):
        GaussianSymbolModel(np.zeros(2), np.array([1.0, 0.0]))


@pytest.fixture
def entropy_model():
    torch.manual_seed(0)
    return EntropyModel(8, EntropyConfig(hyper_channels=8, hyper_levels=1)).eval()


def test_latent_payload_roundtrip(entropy_model):
    y_hat = torch.randint(-6, 7, (1, 8, 4, 6)).float()
    z_hat = torch.round(entropy_model.h_a(y_hat)).detach() + 0.0
    payload = compress_latents(entropy_model, y_hat, z_hat)
    y_back, z_back, consumed = decompress_latents(entropy_model, payload.data, (8, 4, 6))
    assert consumed == len(payload.data)
    assert torch.equal(y_back, y_hat)
    assert torch.equal(z_back, z_hat)


def test_estimate_matches_coded_bits(entropy_model):
    """Coded size stays within 2% + 64 bits of the model estimate."""
    torch.manual_seed(1)
    for y in (torch.zeros(1, 8, 8, 8), torch.randn(1, 8, 8, 8) * 0.5):
        estimated, actual = estimate_vs_actual(entropy_model, y)
        assert abs(actual - estimated) <= 0.02 * estimated + 64


def test_estimate_equals_rounded_training_rate(entropy_model):
    y = torch.randn(1, 8, 4, 4) * 2
    z_hat = torch.round(entropy_model.h_a(y)).detach()
    rate, means, scales = model_likelihoods(y, HyperLatent(z_hat), entropy_model, "inference")
    out = entropy_model(y, "train", noise_y=torch.round(y) - y, noise_z=z_hat - entropy_model.h_a(y))
    assert torch.allclose(rate.bits, out.y_rate.bits, rtol=1e-5)
    assert means.shape == y.shape and bool((scales >= 0.11).all())


def test_non_finite_parameters_rejected(entropy_model):
    with torch.no_grad():
        entropy_model.h_s[-1].bias[0] = float("nan")
    with pytest.raises(ContractError):
        model_likelihoods(torch.zeros(1, 8, 4, 4), HyperLatent(torch.zeros(1, 8, 2, 2)), entropy_model)


def test_context_model_payload_roundtrip():
    torch.manual_seed(2)
    model = EntropyModel(4, EntropyConfig(hyper_channels=4, hyper_levels=1, use_context=True)).eval()
    y_hat = torch.randint(-3, 4, (1, 4, 4, 4)).float()
    z_hat = torch.round(model.h_a(y_hat)).detach() + 0.0
    payload = compress_latents(model, y_hat, z_hat)
    y_back, _, _ = decompress_latents(model, payload.data, (4, 4, 4))
    assert torch.equal(y_back, y_hat)
