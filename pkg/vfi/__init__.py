from .types import FlowField, OcclusionMap
from .warp import backward_warp, fuse, warp_tensor
from .backend import InterpolatorBackend, PyramidFlowBackend, build_backend, load_backend, save_backend
from .interpolate import estimate_flows, interpolate_middle, interpolate_tensors
