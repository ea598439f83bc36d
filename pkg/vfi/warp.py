#!/usr/bin/env python3
"""
Backward warping and two-reference fusion.

Sampling is bilinear in pixel coordinates with border replication; integer
displacements are reproduced exactly and a zero flow is the identity.
"""

import torch

from core.errors import ContractError
from core.frame import Frame
from .types import FlowField, OcclusionMap


def warp_tensor(image: torch.Tensor, flow: torch.Tensor) -> torch.Tensor:
    """Sample image [B, C, H, W] at p + flow(p); flow is [B, 2, H, W] in pixels."""
    if image.dim() != 4 or flow.dim() != 4 or flow.shape[1] != 2:
        raise ContractError(f"warp expects [B,C,H,W] image and [B,2,H,W] flow, got "
                            f"{tuple(image.shape)} and {tuple(flow.shape)}")
    if image.shape[0] != flow.shape[0] or image.shape[-2:] != flow.shape[-2:]:
        raise ContractError(f"image {tuple(image.shape)} and flow {tuple(flow.shape)} not congruent")
    b, c, h, w = image.shape
    ys = torch.arange(h, dtype=image.dtype, device=image.device).view(1, h, 1)
    xs = torch.arange(w, dtype=image.dtype, device=image.device).view(1, 1, w)
    x = (xs + flow[:, 0]).clamp(0, w - 1)
    y = (ys + flow[:, 1]).clamp(0, h - 1)
    x0 = torch.floor(x)
    y0 = torch.floor(y)
    fx = (x - x0).unsqueeze(1)
    fy = (y - y0).unsqueeze(1)
    x0i = x0.long()
    y0i = y0.long()
    x1i = (x0i + 1).clamp(max=w - 1)
    y1i = (y0i + 1).clamp(max=h - 1)

    flat = image.reshape(b, c, h * w)

    def gather(yi: torch.Tensor, xi: torch.Tensor) -> torch.Tensor:
        idx = (yi * w + xi).view(b, 1, h * w).expand(b, c, h * w)
        return torch.gather(flat, 2, idx).view(b, c, h, w)

    top = gather(y0i, x0i) * (1 - fx) + gather(y0i, x1i) * fx
    bottom = gather(y1i, x0i) * (1 - fx) + gather(y1i, x1i) * fx
    return top * (1 - fy) + bottom * fy


def fuse_tensor(warped_prev: torch.Tensor, warped_next: torch.Tensor,
                weights: torch.Tensor, complement: torch.Tensor) -> torch.Tensor:
    return weights * warped_prev + complement * warped_next


def backward_warp(frame: Frame, flow: FlowField) -> Frame:
    if frame.size != tuple(flow.vectors.shape[-2:]):
        raise ContractError(f"frame {frame.size} and flow {tuple(flow.vectors.shape[-2:])} not congruent")
    out = warp_tensor(frame.batch(), flow.vectors.unsqueeze(0).to(frame.pixels.dtype))
    return frame.with_pixels(out.squeeze(0).clamp(0.0, 1.0))


def fuse(warped_prev: Frame, warped_next: Frame, occlusion: OcclusionMap) -> Frame:
    """O * prev + (1 - O) * next, clamped to [0, 1]."""
    if warped_prev.size != warped_next.size or warped_prev.size != tuple(occlusion.weights.shape[-2:]):
        raise ContractError("fusion inputs not congruent")
    out = fuse_tensor(warped_prev.pixels, warped_next.pixels, occlusion.weights, occlusion.complement)
    return warped_prev.with_pixels(out.clamp(0.0, 1.0))
