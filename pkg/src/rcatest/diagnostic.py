"""The scale-invariant diagnostic ``D_T`` and series preprocessing.

``D_T`` averages ``v_p / (v_p + |X_t|^s)`` over ``t = p+1..T`` where ``v_p``
is the mean of ``|X_t|^s`` over the training window ``t = 1..p``.  It tends
to a positive constant for strictly stationary data and to zero at a
polynomial rate otherwise, without requiring any moment of ``X_t``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .dgp import TimeSeries
from .errors import (
    DegenerateSeriesError,
    DomainError,
    InsufficientDataError,
    ParameterError,
)

__all__ = [
    "AutoP",
    "FixedP",
    "DiagnosticConfig",
    "DiagnosticResult",
    "compute_vp",
    "compute_diagnostic",
    "Preprocess",
    "preprocess",
    "gls_detrend",
    "ols_detrend",
    "preprocess_chain",
]


@dataclass(frozen=True)
class AutoP:
    """Training window ``p = ceil(c0 * ln ln T)``."""

    c0: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.c0) and self.c0 > 0):
            raise ParameterError("c0 must be positive")

    def window(self, T: int) -> int:
        if T < 3:
            raise InsufficientDataError(f"automatic p needs T >= 3, got T={T}")
        return max(1, math.ceil(self.c0 * math.log(math.log(T))))


@dataclass(frozen=True)
class FixedP:
    p: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ParameterError("fixed p must be a positive integer")

    def window(self, T: int) -> int:
        return int(self.p)


@dataclass(frozen=True)
class DiagnosticConfig:
    """Settings for ``D_T``.

    ``demean_window`` subtracts the mean of ``X_1..X_p`` from the window
    before computing ``v_p``; the later observations are never demeaned.
    """

    p_rule: Union[AutoP, FixedP] = field(default_factory=AutoP)
    varsigma: float = 2.0
    demean_window: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.varsigma) and self.varsigma > 0):
            raise ParameterError("varsigma must be positive")
        if not isinstance(self.p_rule, (AutoP, FixedP)):
            raise ParameterError("p_rule must be AutoP or FixedP")

    def window(self, T: int) -> int:
        p = self.p_rule.window(T)
        if T <= p:
            raise InsufficientDataError(f"need T > p, got T={T}, p={p}")
        return p


@dataclass(frozen=True)
class DiagnosticResult:
    d_t: float
    v_p: float
    p: int
    T: int
    varsigma: float


def _values(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.values
    return TimeSeries(series).values


def _scaled_window(x: np.ndarray, p: int, cfg: DiagnosticConfig):
    """Window values and their largest magnitude (the working unit)."""
    w = x[:p]
    if cfg.demean_window:
        # a constant window demeans to exactly zero whatever its magnitude
        w = w - (w[0] if np.all(w == w[0]) else w.mean())
    scale = float(np.max(np.abs(w)))
    return w, scale


def compute_vp(series, cfg: DiagnosticConfig = DiagnosticConfig()) -> tuple[float, int]:
    """Training-window moment ``v_p`` and the window length ``p``."""
    x = _values(series)
    p = cfg.window(x.shape[0])
    w, scale = _scaled_window(x, p, cfg)
    if scale == 0.0:
        return 0.0, p
    with np.errstate(over="ignore"):
        v = float(np.mean(np.abs(w / scale) ** cfg.varsigma) * np.float64(scale) ** cfg.varsigma)
    return v, p


def compute_diagnostic(series, cfg: DiagnosticConfig = DiagnosticConfig()) -> DiagnosticResult:
    """Compute ``D_T`` (``D_T(varsigma)`` for ``varsigma != 2``).

    Everything is evaluated in units of the window's largest magnitude, so
    the ratio is immune to overflow of ``|X_t|^varsigma`` on explosive
    paths and exactly scale invariant up to rounding.

    When ``v_p = 0`` but later observations are not all zero, each summand
    is taken as its ``v_p -> 0+`` limit of 0, giving ``D_T = 0``.
    """
    x = _values(series)
    T = x.shape[0]
    p = cfg.window(T)
    w, scale = _scaled_window(x, p, cfg)
    tail = x[p:]
    if scale == 0.0:
        if not np.any(tail):
            raise DegenerateSeriesError("series is identically zero: D_T is undefined")
        return DiagnosticResult(0.0, 0.0, p, T, cfg.varsigma)
    s = cfg.varsigma
    with np.errstate(over="ignore"):
        v = float(np.mean(np.abs(w / scale) ** s))
        y = np.abs(tail / scale) ** s
        v_p = float(v * np.float64(scale) ** s)
    d_t = float(np.mean(v / (v + y)))
    return DiagnosticResult(d_t, v_p, p, T, s)


class Preprocess(enum.Enum):
    NONE = "none"
    DEMEAN = "demean"
    OLS_DETREND = "ols-detrend"
    GLS_DETREND = "gls-detrend"
    LOG = "log"
    DIFF = "diff"


def _trend_design(T: int) -> np.ndarray:
    return np.column_stack([np.ones(T), np.arange(1, T + 1, dtype=np.float64)])


def ols_detrend(y: np.ndarray) -> np.ndarray:
    """Residuals from a least-squares fit of intercept and linear trend."""
    z = _trend_design(y.shape[0])
    beta, *_ = np.linalg.lstsq(z, y, rcond=None)
    return y - z @ beta


def gls_detrend(y: np.ndarray, cbar: float = -13.5) -> np.ndarray:
    """Local-to-unity GLS detrending with intercept and trend.

    Intercept and slope are estimated by OLS on quasi-differenced data
    ``(y_1, y_t - a y_{t-1})`` and ``(z_1, z_t - a z_{t-1})`` with
    ``a = 1 + cbar / T``, then removed from the original series.
    """
    T = y.shape[0]
    a = 1.0 + cbar / T
    z = _trend_design(T)
    yq = np.concatenate([y[:1], y[1:] - a * y[:-1]])
    zq = np.vstack([z[:1], z[1:] - a * z[:-1]])
    beta, *_ = np.linalg.lstsq(zq, yq, rcond=None)
    return y - z @ beta


def preprocess(series, mode: Union[Preprocess, str] = Preprocess.NONE, cbar: float = -13.5) -> TimeSeries:
    """Apply one transform and return a new series (the label is kept)."""
    mode = Preprocess(mode)
    label = series.label if isinstance(series, TimeSeries) else None
    x = _values(series)
    T = x.shape[0]
    if mode is Preprocess.NONE:
        out = x.copy()
    elif mode is Preprocess.DEMEAN:
        out = x - x.mean()
    elif mode in (Preprocess.OLS_DETREND, Preprocess.GLS_DETREND):
        if T < 3:
            raise InsufficientDataError("detrending needs at least 3 observations")
        out = ols_detrend(x) if mode is Preprocess.OLS_DETREND else gls_detrend(x, cbar)
    elif mode is Preprocess.LOG:
        if np.any(x <= 0):
            raise DomainError("log transform needs strictly positive values")
        out = np.log(x)
    else:
        if T < 2:
            raise InsufficientDataError("differencing needs at least 2 observations")
        out = np.diff(x)
    return TimeSeries(out, label)


def preprocess_chain(series, modes: Iterable[Union[Preprocess, str]], cbar: float = -13.5) -> TimeSeries:
    """Apply transforms strictly in the given order."""
    for mode in modes:
        series = preprocess(series, mode, cbar)
    return series if isinstance(series, TimeSeries) else TimeSeries(series)
