#!/usr/bin/env python3
"""
Quantized cumulative frequency tables for the range coder.

A model supplies one CDF row per coded symbol. Rows hold ``value_bins``
integer values starting at ``offsets`` and, when ``escape`` is set, one
trailing escape bin for values outside that support. Every row is strictly
increasing from 0 to 2^16.

Continuous cumulative masses G are mapped to integers with

    cdf[k] = floor(G[k] * (2^16 - nbins)) + k

which gives every bin at least one count and keeps the total exact.

Escape masses come in two modes. ``fixed`` gives the escape bin 1/(2L) for a
support of [-L, L] and rescales the in-support masses to the rest; ``tail``
gives it whatever mass the model places outside the support.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from core.errors import ContractError

PRECISION = 16
TOTAL = 1 << PRECISION
ESCAPE_MODES = ("fixed", "tail")


def fixed_escape_mass(support: int) -> float:
    return 1.0 / (2.0 * support)


def escape_mass_for(mode: str, support: int) -> Optional[float]:
    """Escape mass for ``mode``; None means the tail mass of the model."""
    if mode not in ESCAPE_MODES:
        raise ContractError(f"unknown escape mode '{mode}', expected one of {ESCAPE_MODES}")
    return fixed_escape_mass(support) if mode == "fixed" else None


@dataclass
class SymbolTables:
    cdf: np.ndarray          # int64 [m, W], padded with TOTAL past each row's end
    value_bins: np.ndarray   # int64 [m]
    offsets: np.ndarray      # int64 [m]

    def probabilities(self) -> np.ndarray:
        """Bin masses [m, W-1] (zeros in padding)."""
        return np.diff(self.cdf, axis=1) / float(TOTAL)


def quantize_cumulative(cum: np.ndarray, nbins: np.ndarray, precision: int = PRECISION) -> np.ndarray:
    """Map non-decreasing cumulative masses [m, W] (cum[:, 0] = 0) to integer CDF rows."""
    total = 1 << precision
    cum = np.asarray(cum, dtype=np.float64)
    nbins = np.asarray(nbins, dtype=np.int64)
    m, width = cum.shape
    if (nbins < 1).any() or (nbins >= width).any():
        raise ContractError("bin counts must be in [1, width)")
    if (nbins >= total).any():
        raise ContractError(f"too many bins for {precision}-bit precision")
    k = np.arange(width, dtype=np.int64)[None, :]
    scale = (total - nbins)[:, None].astype(np.float64)
    cdf = np.floor(np.clip(cum, 0.0, 1.0) * scale).astype(np.int64) + k
    cdf = np.where(k <= nbins[:, None], cdf, total)
    cdf[np.arange(m), nbins] = total
    cdf[:, 0] = 0
    return cdf


class SymbolModel(ABC):
    escape: bool = True
    precision: int = PRECISION

    @abstractmethod
    def __len__(self) -> int:
        ...

    @abstractmethod
    def chunk(self, start: int, stop: int) -> SymbolTables:
        """Tables for symbols ``start..stop-1``, one row per symbol."""

    def tables(self) -> SymbolTables:
        return self.chunk(0, len(self))


class TableSymbolModel(SymbolModel):
    """A small set of shared tables selected per symbol by ``index``."""

    def __init__(self, cdf: np.ndarray, value_bins: np.ndarray, offsets: np.ndarray,
                 index: Optional[np.ndarray] = None, escape: bool = True):
        self.cdf = np.asarray(cdf, dtype=np.int64)
        self.value_bins = np.asarray(value_bins, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.index = (np.zeros(0, dtype=np.int64) if index is None
                      else np.asarray(index, dtype=np.int64).reshape(-1))
        self.escape = escape
        self.validate()

    def __len__(self) -> int:
        return len(self.index)

    def with_index(self, index: np.ndarray) -> "TableSymbolModel":
        return TableSymbolModel(self.cdf, self.value_bins, self.offsets, index, self.escape)

    def validate(self) -> None:
        if self.cdf.ndim != 2 or len(self.value_bins) != len(self.cdf) or len(self.offsets) != len(self.cdf):
            raise ContractError("cdf, value_bins and offsets disagree in table count")
        nbins = self.value_bins + (1 if self.escape else 0)
        rows = np.arange(len(self.cdf))
        if (self.cdf[:, 0] != 0).any() or (self.cdf[rows, nbins] != TOTAL).any():
            raise ContractError("every cdf row must run from 0 to 2^16")
        k = np.arange(self.cdf.shape[1])[None, :]
        steps = np.diff(self.cdf, axis=1)
        if (steps[k[:, :-1] < nbins[:, None]] <= 0).any():
            raise ContractError("cdf rows must be strictly increasing over their support")
        if len(self.index) and (self.index.min() < 0 or self.index.max() >= len(self.cdf)):
            raise ContractError("table index out of range")

    def chunk(self, start: int, stop: int) -> SymbolTables:
        idx = self.index[start:stop]
        return SymbolTables(self.cdf[idx], self.value_bins[idx], self.offsets[idx])

    @classmethod
    def from_pmf(cls, pmf: np.ndarray, offsets: np.ndarray, index: Optional[np.ndarray] = None,
                 escape: bool = True, escape_mass: Optional[float] = None) -> "TableSymbolModel":
        """Tables from value masses [t, n].

        With ``escape`` the escape bin gets ``escape_mass`` (in-support masses
        are rescaled to the remainder) or, when it is None, the missing mass.
        """
        pmf = np.clip(np.asarray(pmf, dtype=np.float64), 0.0, None)
        if pmf.ndim == 1:
            pmf = pmf[None, :]
        t, n = pmf.shape
        mass = pmf.sum(axis=1, keepdims=True)
        if not escape:
            pmf = pmf / np.where(mass > 0, mass, 1.0)
        elif escape_mass is not None:
            if not 0.0 < escape_mass < 1.0:
                raise ContractError(f"escape mass must be in (0, 1), got {escape_mass}")
            pmf = pmf / np.where(mass > 0, mass, 1.0) * (1.0 - escape_mass)
        cum = np.zeros((t, n + 2))
        cum[:, 1:n + 1] = np.cumsum(pmf, axis=1)
        cum[:, n + 1] = 1.0
        nbins = np.full(t, n + 1 if escape else n, dtype=np.int64)
        cdf = quantize_cumulative(cum, nbins)
        return cls(cdf, np.full(t, n), np.asarray(offsets, dtype=np.int64).reshape(t), index, escape)

    @classmethod
    def uniform(cls, n_values: int, count: int, offset: int = 0) -> "TableSymbolModel":
        return cls.from_pmf(np.full((1, n_values), 1.0 / n_values), np.array([offset]),
                            np.zeros(count, dtype=np.int64), escape=False)


class GaussianSymbolModel(SymbolModel):
    """Per-element discretized Gaussians for values s = y_hat - round(mu).

    ``delta`` = mu - round(mu) in [-0.5, 0.5), ``sigma`` the scale.

    fixed: every element codes [-L, L] (L = ``support``) and the escape bin
           holds 1/(2L); the Gaussian mass over the support is renormalised
           to 1 - 1/(2L).
    tail:  element i codes [-L_i, L_i] with L_i = clamp(ceil(6 sigma) + 1, 1, L)
           and the escape bin carries the Gaussian tail beyond it.
    """

    def __init__(self, delta: np.ndarray, sigma: np.ndarray, support: int = 64, escape_mode: str = "fixed"):
        self.delta = np.asarray(delta, dtype=np.float64).reshape(-1)
        self.sigma = np.asarray(sigma, dtype=np.float64).reshape(-1)
        if self.delta.shape != self.sigma.shape:
            raise ContractError("delta and sigma must have the same number of elements")
        if not (np.isfinite(self.delta).all() and np.isfinite(self.sigma).all()) or (self.sigma <= 0).any():
            raise ContractError("gaussian parameters must be finite with positive scale")
        if support < 1:
            raise ContractError(f"support must be >= 1, got {support}")
        self.support = int(support)
        self.escape_mode = escape_mode
        self.escape_mass = escape_mass_for(escape_mode, self.support)
        if self.escape_mass is None:
            self.half_width = np.clip(np.ceil(6.0 * self.sigma) + 1, 1, self.support).astype(np.int64)
        else:
            self.half_width = np.full(len(self.sigma), self.support, dtype=np.int64)
        self.escape = True

    def __len__(self) -> int:
        return len(self.sigma)

    def chunk(self, start: int, stop: int) -> SymbolTables:
        delta = self.delta[start:stop, None]
        sigma = self.sigma[start:stop, None]
        half = self.half_width[start:stop]
        width = 2 * self.support + 3
        k = np.arange(width, dtype=np.float64)[None, :]
        left = -half[:, None] - 0.5 - delta
        base = ndtr(left / sigma)
        cum = ndtr((left + k) / sigma) - base
        value_bins = 2 * half + 1
        nbins = value_bins + 1
        if self.escape_mass is not None:
            inside = np.take_along_axis(cum, value_bins[:, None], axis=1)
            cum = cum / inside * (1.0 - self.escape_mass)
        cum = np.where(k > value_bins[:, None], 1.0, cum)
        cdf = quantize_cumulative(cum, nbins)
        return SymbolTables(cdf, value_bins, -half)


def split_means(mu: np.ndarray):
    """Integer centre round(mu) (ties up) and fractional offset delta in [-0.5, 0.5)."""
    mu = np.asarray(mu, dtype=np.float64)
    centre = np.floor(mu + 0.5)
    return centre.astype(np.int64), mu - centre


def laplace_model(scales: np.ndarray, support: int, index: np.ndarray,
                  escape_mode: str = "fixed") -> TableSymbolModel:
    """Zero-mean discretized Laplace tables over [-support, support], one per scale."""
    scales = np.maximum(np.asarray(scales, dtype=np.float64).reshape(-1), 1e-3)
    v = np.arange(-support, support + 1, dtype=np.float64)[None, :]
    b = scales[:, None]

    def cdf(x):
        tail = 0.5 * np.exp(-np.abs(x) / b)
        return np.where(x < 0, tail, 1.0 - tail)

    pmf = cdf(v + 0.5) - cdf(v - 0.5)
    offsets = np.full(len(scales), -support, dtype=np.int64)
    return TableSymbolModel.from_pmf(pmf, offsets, index, escape=True,
                                     escape_mass=escape_mass_for(escape_mode, support))
