"""RCAR(1) data generation and regime classification.

The process is

    X_t = (phi + b_t) X_{t-1} + e_t,        X*_t = d_t + X_t,

with i.i.d. symmetric ``b_t`` and ``e_t``.  Whether ``X_t`` admits a strictly
stationary solution is decided by the sign of the Lyapunov exponent
``E ln|phi + b_0|``; :func:`lyapunov_gaussian` evaluates it for Gaussian
``b_t`` by quadrature.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, stats

from . import _backend
from .errors import NumericError, ParameterError, SimulationOverflowError
from .rngdist import Degenerate, Dist, Gaussian, RngStream, draw

__all__ = [
    "TimeSeries",
    "DeterministicSpec",
    "NoDeterministic",
    "Constant",
    "PiecewiseConstant",
    "Sinusoid",
    "LinearTrend",
    "RcarParams",
    "Regime",
    "RegimeLabel",
    "simulate",
    "lyapunov_gaussian",
    "classify",
    "solve_boundary_sigma",
    "coefficient_stream",
    "innovation_stream",
]

# sub-stream tags used by simulate()
_COEF_TAG = 0
_INNOV_TAG = 1

# the standard normal density underflows float64 beyond |z| ~ 38.6
_Z_CUT = 40.0


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered, finite, real-valued observations ``X_1..X_T``."""

    values: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64).ravel()
        if arr.size < 1:
            raise ParameterError("a time series needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("time series values must all be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.values, other.values)

    @property
    def T(self) -> int:
        return len(self)


class DeterministicSpec:
    """Deterministic component ``d_t`` added to the simulated path."""

    #: whether T^{-1} sum d_t^2 stays bounded; when it does the test needs no detrending
    square_integrable: bool = True

    def values(self, T: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class NoDeterministic(DeterministicSpec):
    def values(self, T):
        return np.zeros(T)


@dataclass(frozen=True)
class Constant(DeterministicSpec):
    c: float

    def values(self, T):
        return np.full(T, float(self.c))


@dataclass(frozen=True)
class PiecewiseConstant(DeterministicSpec):
    """Mean shifts: ``levels`` is a sequence of ``(start_index, level)``.

    Start indices are 1-based, strictly increasing and the first must be 1.
    """

    levels: tuple

    def __post_init__(self):
        levels = tuple((int(s), float(v)) for s, v in self.levels)
        if not levels:
            raise ParameterError("PiecewiseConstant needs at least one level")
        starts = [s for s, _ in levels]
        if starts[0] != 1 or any(b <= a for a, b in zip(starts, starts[1:])):
            raise ParameterError("start indices must be strictly increasing from 1")
        object.__setattr__(self, "levels", levels)

    def values(self, T):
        out = np.empty(T)
        bounds = [s for s, _ in self.levels[1:]] + [T + 1]
        for (start, level), stop in zip(self.levels, bounds):
            out[start - 1 : stop - 1] = level
        return out


@dataclass(frozen=True)
class Sinusoid(DeterministicSpec):
    amplitude: float
    period: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.period > 0:
            raise ParameterError("Sinusoid period must be positive")

    def values(self, T):
        t = np.arange(1, T + 1, dtype=np.float64)
        return self.amplitude * np.sin(2.0 * np.pi * t / self.period + self.phase)


@dataclass(frozen=True)
class LinearTrend(DeterministicSpec):
    intercept: float
    slope: float

    square_integrable = False

    def values(self, T):
        t = np.arange(1, T + 1, dtype=np.float64)
        return self.intercept + self.slope * t


@dataclass(frozen=True)
class RcarParams:
    """Full description of an RCAR(1) data generating process."""

    phi: float
    b_dist: Dist = field(default_factory=lambda: Degenerate(0.0))
    e_dist: Dist = field(default_factory=lambda: Gaussian(1.0))
    x0: float = 0.0
    burn_in: int = 1000
    deterministic: DeterministicSpec = field(default_factory=NoDeterministic)

    def __post_init__(self):
        if not math.isfinite(self.phi) or not math.isfinite(self.x0):
            raise ParameterError("phi and x0 must be finite")
        if int(self.burn_in) != self.burn_in or self.burn_in < 0:
            raise ParameterError("burn_in must be a non-negative integer")
        for name in ("b_dist", "e_dist"):
            dist = getattr(self, name)
            if not isinstance(dist, Dist):
                raise ParameterError(f"{name} must be a Dist")
            if not dist.symmetric:
                raise ParameterError(f"{name} must be symmetric about zero, got {dist!r}")

    @classmethod
    def gaussian_rcar(cls, phi: float, sigma_b2: float, e_dist: Dist | None = None, **kw):
        """Convenience constructor with ``b_t ~ N(0, sigma_b2)`` (``b = 0`` when zero)."""
        if sigma_b2 < 0:
            raise ParameterError("sigma_b2 must be non-negative")
        b = Gaussian(sigma_b2) if sigma_b2 > 0 else Degenerate(0.0)
        return cls(phi=phi, b_dist=b, e_dist=e_dist or Gaussian(1.0), **kw)


def coefficient_stream(stream: RngStream) -> RngStream:
    """Sub-stream :func:`simulate` draws ``b_t`` from."""
    return stream.child(_COEF_TAG)


def innovation_stream(stream: RngStream) -> RngStream:
    """Sub-stream :func:`simulate` draws ``e_t`` from."""
    return stream.child(_INNOV_TAG)


def simulate(params: RcarParams, T: int, stream: RngStream) -> TimeSeries:
    """Simulate ``T`` observations of ``d_t + X_t`` after ``params.burn_in`` steps.

    Raises
    ------
    SimulationOverflowError
        If the path leaves the finite float64 range (explosive regimes with
        long samples).
    """
    if int(T) != T or T < 1:
        raise ParameterError(f"T must be a positive integer, got {T!r}")
    T = int(T)
    n = params.burn_in + T
    b = draw(coefficient_stream(stream), params.b_dist, n)
    e = draw(innovation_stream(stream), params.e_dist, n)
    path, overflow = _backend.rcar_path(params.phi + b, e, params.x0)
    if overflow != -1:
        raise SimulationOverflowError(int(overflow), n)
    x = path[params.burn_in :] + params.deterministic.values(T)
    if not np.all(np.isfinite(x)):
        raise SimulationOverflowError(n, n)
    return TimeSeries(x)


def lyapunov_gaussian(phi: float, sigma_b2: float) -> float:
    """``E ln|phi + sigma_b Z|`` for standard normal ``Z``.

    The integrand has a logarithmic singularity at ``z = -phi / sigma_b``;
    the numerical support ``|z| <= 40`` is split there and each piece
    integrated adaptively.
    """
    if not (math.isfinite(phi) and math.isfinite(sigma_b2)):
        raise ParameterError("phi and sigma_b2 must be finite")
    if sigma_b2 < 0:
        raise ParameterError("sigma_b2 must be non-negative")
    if sigma_b2 == 0:
        return math.log(abs(phi)) if phi != 0 else -math.inf
    sigma = math.sqrt(sigma_b2)
    z0 = -phi / sigma

    def integrand(z):
        return math.log(abs(phi + sigma * z)) * stats.norm.pdf(z)

    # finite pieces over the numerical support, broken one unit either side
    # of the singularity (an integrable endpoint singularity suits the
    # adaptive rule) and at the centre of the density when the singularity
    # is away from it, so no piece can miss the bulk of the mass
    cuts = {-_Z_CUT, _Z_CUT}
    if abs(z0) >= 1.0:
        cuts.add(0.0)
    cuts.update(c for c in (z0 - 1.0, z0, z0 + 1.0) if abs(c) < _Z_CUT)
    cuts = sorted(cuts)
    pieces = list(zip(cuts[:-1], cuts[1:]))
    total = 0.0
    for lo, hi in pieces:
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-14, epsrel=1e-12, limit=200)
        total += val
    return total


class Regime(enum.Enum):
    STRICTLY_STATIONARY = "stationary"
    BOUNDARY_NONSTATIONARY = "boundary"
    EXPLOSIVE_NONSTATIONARY = "explosive"

    @property
    def is_stationary(self) -> bool:
        return self is Regime.STRICTLY_STATIONARY


@dataclass(frozen=True)
class RegimeLabel:
    lyapunov: float
    regime: Regime
    finite_variance: bool

    def __str__(self):
        var = "finite" if self.finite_variance else "infinite"
        return f"{self.regime.value} (E ln|phi+b| = {self.lyapunov:.6g}, {var} variance)"


def classify(phi: float, sigma_b2: float, zero_tol: float = 1e-6) -> RegimeLabel:
    """Label a Gaussian-coefficient parameterisation by its Lyapunov sign."""
    if not zero_tol > 0:
        raise ParameterError("zero_tol must be positive")
    lyap = lyapunov_gaussian(phi, sigma_b2)
    if abs(lyap) <= zero_tol:
        regime = Regime.BOUNDARY_NONSTATIONARY
    elif lyap < 0:
        regime = Regime.STRICTLY_STATIONARY
    else:
        regime = Regime.EXPLOSIVE_NONSTATIONARY
    return RegimeLabel(lyap, regime, phi * phi + sigma_b2 < 1.0)


def solve_boundary_sigma(phi: float, tol: float = 1e-8, max_iter: int = 200) -> float:
    """Coefficient variance putting ``(phi, sigma_b2)`` on the boundary.

    Bisection on the increasing branch of ``sigma_b2 -> E ln|phi + b|``
    (the exponent first dips below ``ln|phi|`` before growing like
    ``ln sigma_b``), stopped once ``|E ln|phi + b|| < tol``.
    """
    if not (0 < phi <= 1):
        raise ParameterError(f"phi must lie in (0, 1], got {phi}")
    lo = phi * phi
    f_lo = lyapunov_gaussian(phi, lo)
    if not f_lo < 0:
        raise NumericError(f"no root bracketed: exponent at sigma_b2={lo} is {f_lo}")
    hi = max(2.0 * lo, 1.0)
    for _ in range(64):
        if lyapunov_gaussian(phi, hi) > 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericError("no root bracketed: exponent never turns positive")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = lyapunov_gaussian(phi, mid)
        if abs(f_mid) < tol:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    raise NumericError(f"bisection did not reach |exponent| < {tol} in {max_iter} steps")
