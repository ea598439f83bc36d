#!/usr/bin/env python3
"""
Sequence-level R-D evaluation with two accounting modes.

sequence: all payload bits over all pixels, quality averaged over all frames
b-only:   B payload bits over B pixels, quality averaged over B frames

The interpolation-only baseline codes B frames with empty payloads, so its
B frames are the interpolated frames themselves.
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from core.config import GopConfig
from core.errors import EvaluationError
from core.frame import Frame
from pipeline.codec import EncodeResult, encode_sequence
from pipeline.models import CodecModels
from .curves import RDCurve, RDPoint
from .quality import bpp, ms_ssim, psnr

logger = logging.getLogger(__name__)

ACCOUNTING_MODES = ("sequence", "b-only")


def rd_point(originals: Sequence[Frame], result: EncodeResult, accounting: str = "sequence",
             interp_only: bool = False) -> RDPoint:
    if accounting not in ACCOUNTING_MODES:
        raise EvaluationError(f"unknown accounting mode '{accounting}', expected one of {ACCOUNTING_MODES}")
    stats = result.stats
    if accounting == "b-only":
        stats = [s for s in stats if s.coding_type == "B"]
    if not stats:
        raise EvaluationError(f"no frames to account for in '{accounting}' mode")
    h0, w0 = result.bitstream.header.height, result.bitstream.header.width
    bits = sum(s.bits for s in stats)
    indices = [s.frame_index for s in stats]
    psnrs = [psnr(originals[i], result.reconstructions[i]) for i in indices]
    ssims = [ms_ssim(originals[i], result.reconstructions[i]) for i in indices]
    return RDPoint(bpp(bits, h0, w0, len(indices)), float(np.mean(psnrs)), float(np.mean(ssims)), interp_only)


def evaluate_sequence(frames: Sequence[Frame], models: CodecModels, gop: Optional[GopConfig] = None,
                      accounting: str = "sequence") -> RDPoint:
    gop = gop or GopConfig()
    result = encode_sequence(frames, models, gop)
    return rd_point(frames, result, accounting, gop.b_mode == "interp_only" or models.codec is None)


@dataclass
class LadderEvaluation:
    curve: RDCurve
    baseline: List[RDPoint]

    def psnr_gains(self) -> List[float]:
        """Codec minus interpolation-only PSNR at each ladder point."""
        return [p.psnr_db - b.psnr_db for p, b in zip(self.curve.points, self.baseline)]


def evaluate_ladder(frames: Sequence[Frame], ladder: Sequence[CodecModels], gop: Optional[GopConfig] = None,
                    accounting: str = "sequence", label: str = "ibvc") -> LadderEvaluation:
    gop = gop or GopConfig()
    points, baseline = [], []
    for models in sorted(ladder, key=lambda m: m.lambda_id):
        point = evaluate_sequence(frames, models, replace(gop, b_mode="codec"), accounting)
        base = evaluate_sequence(frames, models, replace(gop, b_mode="interp_only"), accounting)
        logger.info("lambda id %d: %.4f bpp, %.2f dB (interpolation only %.2f dB)",
                    models.lambda_id, point.bpp, point.psnr_db, base.psnr_db)
        points.append(point)
        baseline.append(base)
    order = np.argsort([p.bpp for p in points], kind="stable")
    return LadderEvaluation(RDCurve(f"{label} ({accounting})", points),
                            [baseline[i] for i in order])
