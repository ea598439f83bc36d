import pytest
import torch

from core.config import VfiConfig
from core.errors import ConfigurationError, ContractError
from core.frame import Frame
from train.corpus import translating_square
from vfi.backend import InterpolatorBackend, PyramidFlowBackend, build_backend, load_backend, save_backend
from vfi.interpolate import estimate_flows, interpolate_middle
from vfi.losses import census_loss, interpolation_loss
from vfi.types import FlowField, OcclusionMap
from vfi.warp import backward_warp, fuse, warp_tensor
from metrics_eval.quality import psnr
from .conftest import slow


class FixedBackend(InterpolatorBackend):
    """Returns the same flows and occlusion for any input."""
    name = "fixed"
    version = 1

    def __init__(self, flow_prev, flow_next, occlusion):
        super().__init__()
        self.register_buffer("flow_prev", flow_prev)
        self.register_buffer("flow_next", flow_next)
        self.register_buffer("occlusion", occlusion)

    def forward(self, ref_prev, ref_next):
        b = ref_prev.shape[0]
        return (self.flow_prev.expand(b, -1, -1, -1), self.flow_next.expand(b, -1, -1, -1),
                self.occlusion.expand(b, -1, -1, -1))


def _ramp(h=8, w=10):
    row = torch.arange(w, dtype=torch.float32) / w
    return Frame(row.expand(3, h, w).contiguous())


def test_zero_flow_is_identity():
    frame = Frame(torch.rand(3, 9, 13))
    out = backward_warp(frame, FlowField.zeros(9, 13))
    assert torch.equal(out.pixels, frame.pixels)


def test_unit_shift_on_ramp():
    frame = _ramp()
    out = backward_warp(frame, FlowField.constant(1.0, 0.0, 8, 10))
    expected = frame.pixels.clone()
    expected[..., :-1] = frame.pixels[..., 1:]
    expected[..., -1] = frame.pixels[..., -1]
    assert torch.equal(out.pixels, expected)


def test_half_pixel_on_alternating_columns():
    """Bilinear average of 0 and 1 neighbours; the last column replicates."""
    cols = (torch.arange(12) % 2).float()
    frame = Frame(cols.expand(3, 6, 12).contiguous())
    out = backward_warp(frame, FlowField.constant(0.5, 0.0, 6, 12))
    assert torch.equal(out.pixels[..., :-1], torch.full((3, 6, 11), 0.5))


def test_warp_rejects_mismatched_flow():
    with pytest.raises(ContractError):
        backward_warp(Frame(torch.rand(3, 8, 8)), FlowField.zeros(8, 9))


def test_warp_is_linear():
    torch.manual_seed(0)
    f, g = torch.rand(1, 3, 16, 16), torch.rand(1, 3, 16, 16)
    flow = torch.randn(1, 2, 16, 16) * 3
    lhs = warp_tensor(0.3 * f - 1.7 * g, flow)
    rhs = 0.3 * warp_tensor(f, flow) - 1.7 * warp_tensor(g, flow)
    assert torch.allclose(lhs, rhs, atol=1e-6)


def test_fusion_symmetric_under_swap():
    torch.manual_seed(1)
    a, b = Frame(torch.rand(3, 8, 8)), Frame(torch.rand(3, 8, 8))
    occ = OcclusionMap(torch.rand(1, 8, 8))
    assert torch.equal(fuse(a, b, occ).pixels, fuse(b, a, occ.flipped()).pixels)


def test_fusion_within_reference_envelope():
    torch.manual_seed(2)
    a, b = torch.rand(3, 8, 8), torch.rand(3, 8, 8)
    out = fuse(Frame(a), Frame(b), OcclusionMap(torch.rand(1, 8, 8))).pixels
    assert bool((out >= torch.minimum(a, b) - 1e-7).all())
    assert bool((out <= torch.maximum(a, b) + 1e-7).all())


def test_occlusion_one_selects_previous_warp():
    torch.manual_seed(3)
    prev, nxt = Frame(torch.rand(3, 8, 8), 0), Frame(torch.rand(3, 8, 8), 2)
    flow = torch.randn(1, 2, 8, 8)
    backend = FixedBackend(flow, torch.zeros(1, 2, 8, 8), torch.ones(1, 1, 8, 8))
    out = interpolate_middle(prev, nxt, backend)
    assert torch.equal(out.pixels, backward_warp(prev, FlowField(flow[0])).pixels)
    assert out.index == 1


def test_half_occlusion_on_identical_refs():
    ref = Frame(torch.rand(3, 8, 8))
    backend = FixedBackend(torch.zeros(1, 2, 8, 8), torch.zeros(1, 2, 8, 8), torch.full((1, 1, 8, 8), 0.5))
    assert torch.equal(interpolate_middle(ref, ref, backend).pixels, ref.pixels)


def test_missing_backend():
    ref = Frame(torch.rand(3, 8, 8))
    with pytest.raises(ConfigurationError):
        estimate_flows(ref, ref, None)


def test_pyramid_shapes_and_determinism():
    torch.manual_seed(0)
    backend = PyramidFlowBackend()
    a, b = Frame(torch.rand(3, 64, 64)), Frame(torch.rand(3, 64, 64))
    fp, fn, occ = estimate_flows(a, b, backend)
    assert fp.vectors.shape == (2, 64, 64) and fn.vectors.shape == (2, 64, 64)
    assert occ.weights.shape == (1, 64, 64)
    again = estimate_flows(a, b, backend)
    assert torch.equal(fp.vectors, again[0].vectors)
    assert torch.equal(occ.weights, again[2].weights)


def test_pyramid_rejects_unaligned_size():
    backend = PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8)))
    with pytest.raises(ContractError):
        backend(torch.rand(1, 3, 10, 12), torch.rand(1, 3, 10, 12))


def test_unknown_backend_name():
    with pytest.raises(ConfigurationError):
        build_backend("nope")


def test_backend_checkpoint_roundtrip(tmp_path):
    torch.manual_seed(4)
    backend = PyramidFlowBackend(VfiConfig(levels=2, channels=(4, 8)))
    save_backend(backend, tmp_path / "vfi.pt")
    loaded = load_backend(tmp_path / "vfi.pt")
    assert loaded.digest() == backend.digest()


def test_census_loss_zero_on_identical():
    x = torch.rand(1, 3, 16, 16)
    assert float(census_loss(x, x)) == 0.0
    assert float(interpolation_loss(x, x)) == 0.0
    assert float(interpolation_loss(x, 1 - x)) > 0.0


@slow
def test_trained_backend_recovers_translating_square():
    from train.corpus import SyntheticClipDataset
    from train.vfi_pretrain import pretrain_backend

    torch.manual_seed(0)
    backend = PyramidFlowBackend(VfiConfig(levels=3, channels=(16, 24, 32)))
    pretrain_backend(backend, SyntheticClipDataset(64, 64, seed=0), epochs=30, lr=1e-3, batch=8)
    clip = translating_square()
    mid = interpolate_middle(Frame(clip[0], 0), Frame(clip[2], 2), backend)
    assert psnr(clip[1], mid) > 30.0
    static = Frame(clip[0])
    fp, _, _ = estimate_flows(static, static, backend)
    assert float(fp.magnitude().mean()) < 0.5
