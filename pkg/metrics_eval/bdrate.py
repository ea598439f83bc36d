#!/usr/bin/env python3
"""
Bjontegaard delta rate between two R-D curves.

log10(rate) is fitted as a function of quality for each curve, the fits are
integrated over the shared quality interval, and the mean log-rate
difference is reported as a percentage (negative: the test curve needs
fewer bits for the same quality).
"""

import numpy as np
from scipy.interpolate import PchipInterpolator

from core.errors import EvaluationError
from .curves import RDCurve

MIN_POINTS = 4
FITS = ("cubic", "pchip")


def _prepare(curve: RDCurve, metric: str):
    if len(curve) < MIN_POINTS:
        raise EvaluationError(f"curve '{curve.label}' has {len(curve)} points, need at least {MIN_POINTS}")
    rate = np.asarray(curve.rates(), dtype=np.float64)
    quality = np.asarray(curve.qualities(metric), dtype=np.float64)
    if (rate <= 0).any():
        raise EvaluationError(f"curve '{curve.label}' has non-positive rates")
    order = np.argsort(quality, kind="stable")
    return quality[order], np.log10(rate[order])


def _integral(quality: np.ndarray, log_rate: np.ndarray, lo: float, hi: float, fit: str) -> float:
    if fit == "cubic":
        antiderivative = np.polyint(np.polyfit(quality, log_rate, 3))
        return float(np.polyval(antiderivative, hi) - np.polyval(antiderivative, lo))
    if np.any(np.diff(quality) <= 0):
        raise EvaluationError("piecewise-cubic fit needs strictly increasing quality values")
    return float(PchipInterpolator(quality, log_rate).integrate(lo, hi))


def bd_rate(anchor: RDCurve, test: RDCurve, metric: str = "psnr", fit: str = "cubic") -> float:
    if fit not in FITS:
        raise EvaluationError(f"unknown fit '{fit}', expected one of {FITS}")
    qa, ra = _prepare(anchor, metric)
    qt, rt = _prepare(test, metric)
    lo = max(qa.min(), qt.min())
    hi = min(qa.max(), qt.max())
    if not hi > lo:
        raise EvaluationError(f"curves '{anchor.label}' and '{test.label}' share no quality range")
    avg = (_integral(qt, rt, lo, hi, fit) - _integral(qa, ra, lo, hi, fit)) / (hi - lo)
    return float((10.0 ** avg - 1.0) * 100.0)
