#!/usr/bin/env python3
"""
Bit-free motion compensation: estimate midpoint flows and fuse both references.
"""

from typing import Optional, Tuple

import torch

from core.errors import ConfigurationError, ContractError
from core.frame import CodingType, Frame
from .backend import InterpolatorBackend
from .types import FlowField, OcclusionMap
from .warp import fuse_tensor, warp_tensor


def interpolate_tensors(ref_prev: torch.Tensor, ref_next: torch.Tensor,
                        backend: InterpolatorBackend) -> Tuple[torch.Tensor, torch.Tensor, torch.Tensor, torch.Tensor]:
    """Batched, differentiable interpolation; returns (x_bar, flow_prev, flow_next, occlusion)."""
    flow_prev, flow_next, occ = backend(ref_prev, ref_next)
    warped_prev = warp_tensor(ref_prev, flow_prev)
    warped_next = warp_tensor(ref_next, flow_next)
    x_bar = fuse_tensor(warped_prev, warped_next, occ, 1.0 - occ).clamp(0.0, 1.0)
    return x_bar, flow_prev, flow_next, occ


def estimate_flows(ref_prev: Frame, ref_next: Frame,
                   backend: Optional[InterpolatorBackend]) -> Tuple[FlowField, FlowField, OcclusionMap]:
    if backend is None:
        raise ConfigurationError("interpolator backend not loaded")
    if ref_prev.size != ref_next.size:
        raise ContractError(f"references not congruent: {ref_prev.size} vs {ref_next.size}")
    backend.eval()
    with torch.no_grad():
        flow_prev, flow_next, occ = backend(ref_prev.batch(), ref_next.batch())
    return FlowField(flow_prev[0]), FlowField(flow_next[0]), OcclusionMap(occ[0])


def interpolate_middle(ref_prev: Frame, ref_next: Frame, backend: Optional[InterpolatorBackend],
                       index: Optional[int] = None) -> Frame:
    """x_bar = O * warp(prev, flow_prev) + (1 - O) * warp(next, flow_next)."""
    flow_prev, flow_next, occ = estimate_flows(ref_prev, ref_next, backend)
    with torch.no_grad():
        warped_prev = warp_tensor(ref_prev.batch(), flow_prev.vectors.unsqueeze(0))
        warped_next = warp_tensor(ref_next.batch(), flow_next.vectors.unsqueeze(0))
        out = fuse_tensor(warped_prev[0], warped_next[0], occ.weights, occ.complement).clamp(0.0, 1.0)
    if index is None:
        index = (ref_prev.index + ref_next.index) // 2
    return Frame(pixels=out, index=index, coding_type=CodingType.B, original_size=ref_prev.original_size)
