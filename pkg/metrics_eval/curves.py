#!/usr/bin/env python3
"""
R-D points and curves, and the curve CSV format (label, bpp, psnr_db, ms_ssim).
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Union

from core.errors import EvaluationError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("label", "bpp", "psnr_db", "ms_ssim")
# curves whose label starts with this hold interpolation-only points
INTERP_ONLY_LABEL = "interp-only"


@dataclass(frozen=True)
class RDPoint:
    """One operating point; bpp > 0 except for interpolation-only points.

    An interpolation-only point accounted over B frames alone spends no bits,
    so ``interp_only`` points may carry bpp == 0.
    """
    bpp: float
    psnr_db: float
    ms_ssim: float
    interp_only: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.interp_only:
            if not self.bpp >= 0.0:
                raise EvaluationError(f"bpp must be >= 0 for an interpolation-only point, got {self.bpp}")
        elif not self.bpp > 0.0:
            raise EvaluationError(f"bpp must be > 0, got {self.bpp}")
        if not 0.0 < self.ms_ssim <= 1.0:
            raise EvaluationError(f"ms_ssim must be in (0, 1], got {self.ms_ssim}")

    def quality(self, metric: str) -> float:
        if metric == "psnr":
            return self.psnr_db
        if metric == "ms-ssim":
            return self.ms_ssim
        raise EvaluationError(f"unknown quality metric '{metric}'")


@dataclass
class RDCurve:
    label: str
    points: List[RDPoint] = field(default_factory=list)

    def __post_init__(self):
        self.points = sorted(self.points, key=lambda p: p.bpp)
        self._check_monotone()

    def _check_monotone(self) -> None:
        for a, b in zip(self.points, self.points[1:]):
            if b.bpp == a.bpp:
                logger.warning("curve '%s' has repeated bpp %.6f", self.label, a.bpp)
            if b.psnr_db < a.psnr_db or b.ms_ssim < a.ms_ssim:
                logger.warning("curve '%s' quality decreases between bpp %.4f and %.4f",
                               self.label, a.bpp, b.bpp)

    def __len__(self) -> int:
        return len(self.points)

    def rates(self) -> List[float]:
        return [p.bpp for p in self.points]

    def qualities(self, metric: str = "psnr") -> List[float]:
        return [p.quality(metric) for p in self.points]


def write_curves(curves: Iterable[RDCurve], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for curve in curves:
            for p in curve.points:
                writer.writerow([curve.label, repr(float(p.bpp)), repr(float(p.psnr_db)), repr(float(p.ms_ssim))])
    return path


def read_curves(path: Union[str, Path]) -> List[RDCurve]:
    """Curves in first-appearance order of their labels."""
    path = Path(path)
    grouped: Dict[str, List[RDPoint]] = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise EvaluationError(f"{path}: expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
        for row in reader:
            interp_only = row["label"].startswith(INTERP_ONLY_LABEL)
            try:
                point = RDPoint(float(row["bpp"]), float(row["psnr_db"]), float(row["ms_ssim"]), interp_only)
            except ValueError as e:
                raise EvaluationError(f"{path}: bad row {row}: {e}") from e
            grouped.setdefault(row["label"], []).append(point)
    return [RDCurve(label, pts) for label, pts in grouped.items()]
