#!/usr/bin/env python3
"""
Report emission: curve CSV, R-D plots per metric and the BD-rate table.
"""

import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from core.errors import EvaluationError  # noqa: E402
from .bdrate import bd_rate  # noqa: E402
from .curves import RDCurve, read_curves, write_curves  # noqa: E402

logger = logging.getLogger(__name__)

PLOTS = (("psnr", "psnr_db", "PSNR (dB)"), ("msssim", "ms_ssim", "MS-SSIM"))


def _plot(curves: Sequence[RDCurve], attr: str, ylabel: str, title: str, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for curve in curves:
        ax.plot([p.bpp for p in curve.points], [getattr(p, attr) for p in curve.points],
                marker="o", label=curve.label)
    ax.set_xlabel("bpp")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def emit_report(curves: Sequence[RDCurve], out_dir: Union[str, Path], dataset: str = "desk") -> Dict[str, Path]:
    """Write ``{dataset}_rd.csv`` plus one R-D plot per metric; return the paths."""
    if not curves:
        raise EvaluationError("no curves to report")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"csv": write_curves(curves, out_dir / f"{dataset}_rd.csv")}
    for key, attr, ylabel in PLOTS:
        path = out_dir / f"{dataset}_{key}.png"
        _plot(curves, attr, ylabel, f"{dataset}: {ylabel} vs bpp", path)
        paths[key] = path
    logger.info("report for %s written to %s", dataset, out_dir)
    return paths


def bd_table(anchor_csv: Union[str, Path], test_csvs: Sequence[Union[str, Path]],
             metric: str = "psnr", fit: str = "cubic") -> Dict[str, Dict[str, float]]:
    """BD-rate per shared curve label (row) and test file stem (column)."""
    anchors = {c.label: c for c in read_curves(anchor_csv)}
    table: Dict[str, Dict[str, float]] = {}
    for path in test_csvs:
        column = Path(path).stem
        for curve in read_curves(path):
            if curve.label not in anchors:
                logger.warning("%s: no anchor curve labelled '%s'", path, curve.label)
                continue
            table.setdefault(curve.label, {})[column] = bd_rate(anchors[curve.label], curve, metric, fit)
    if not table:
        raise EvaluationError(f"no curve labels shared between {anchor_csv} and the test files")
    return table


def format_bd_table(table: Dict[str, Dict[str, float]]) -> str:
    columns: List[str] = []
    for row in table.values():
        for col in row:
            if col not in columns:
                columns.append(col)
    width = max([len("dataset")] + [len(r) for r in table]) + 2
    cw = max([10] + [len(c) + 2 for c in columns])
    lines = ["dataset".ljust(width) + "".join(c.rjust(cw) for c in columns)]
    for label, row in table.items():
        cells = [f"{round(row[c], 1) + 0.0:.1f}%" if c in row else "-" for c in columns]
        lines.append(label.ljust(width) + "".join(cell.rjust(cw) for cell in cells))
    return "\n".join(lines)
