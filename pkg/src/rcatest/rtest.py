"""Randomised test for strict stationarity and the strong decision rule.

The diagnostic ``D_T`` is mapped to ``l_T = g(psi(T) D_T)`` (or
``g(1 / (psi(T) D_T))`` when the null is nonstationarity), which diverges
under the null and vanishes under the alternative.  A randomisation turns
this degenerate rate into a pivotal statistic:

    zeta_j(u)  = 1{ xi_j <= u / sqrt(l_T) },               j = 1..R
    theta(u)   = (sum_j zeta_j(u) - R G(0)) / sqrt(R G(0) (1 - G(0)))
    Theta      = sum_u w_u theta(u)^2

with ``xi_j ~ G`` and ``u`` drawn from a discrete law with atoms ``u`` and
weights ``w_u``.  Under the null ``Theta`` is asymptotically chi-squared
with one degree of freedom; under the alternative ``Theta / R -> 1``.

Because the verdict of a single randomisation depends on the researcher's
draws, :func:`strong_decide` repeats the randomisation ``S`` times and
compares the fraction of non-rejections ``Q(alpha)`` with an
iterated-logarithm bound.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Union

import numpy as np
from scipy import stats

from . import _backend
from .diagnostic import DiagnosticConfig, compute_diagnostic
from .errors import InsufficientDataError, ParameterError
from .rngdist import Dist, Gaussian, RngStream, TwoPoint, draw

logger = logging.getLogger(__name__)

__all__ = [
    "GFunction",
    "EqualT",
    "FixedR",
    "RatioR",
    "NullOrientation",
    "CriticalLaw",
    "Verdict",
    "TestConfig",
    "TestOutcome",
    "ThetaDetails",
    "DecisionReport",
    "MIN_TEST_LENGTH",
    "compute_lT",
    "lt_argument",
    "theta_from_draws",
    "randomized_theta",
    "run_test",
    "decision_bound",
    "strong_decide",
]

#: shortest series run_test / strong_decide accept
MIN_TEST_LENGTH = 20

# rows of xi drawn per batch in strong_decide, bounded in total elements
_BATCH_ELEMENTS = 1 << 21


class GFunction(enum.Enum):
    """Monotone map with ``g(0) = 0`` applied to the scaled diagnostic."""

    DOUBLE_EXP = "double-exp"
    SINGLE_EXP = "exp"
    IDENTITY = "identity"

    def __call__(self, x: float) -> float:
        """Evaluate, saturating to ``+inf`` on float64 overflow."""
        if math.isinf(x):
            return math.inf
        try:
            if self is GFunction.DOUBLE_EXP:
                return math.expm1(math.expm1(x))
            if self is GFunction.SINGLE_EXP:
                return math.expm1(x)
        except OverflowError:
            return math.inf
        return float(x)


@dataclass(frozen=True)
class EqualT:
    """``R = T`` randomisations."""

    def size(self, T: int) -> int:
        return int(T)


@dataclass(frozen=True)
class FixedR:
    R: int

    def __post_init__(self):
        if int(self.R) != self.R or self.R < 1:
            raise ParameterError("R must be a positive integer")

    def size(self, T: int) -> int:
        return int(self.R)


@dataclass(frozen=True)
class RatioR:
    """``R = ceil(k T)``."""

    k: float

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ParameterError("k must be positive")

    def size(self, T: int) -> int:
        return max(1, math.ceil(self.k * T))


class NullOrientation(enum.Enum):
    STATIONARY = "stationary"
    NONSTATIONARY = "nonstationary"


class CriticalLaw(enum.Enum):
    """Reference law for critical values and p-values.

    ``CHI2`` matches the limiting null law of ``Theta``; ``NORMAL_LITERAL``
    uses the upper standard-normal quantile instead.
    """

    CHI2 = "chi2"
    NORMAL_LITERAL = "normal-literal"


class Verdict(enum.Enum):
    STATIONARY = "stationary"
    NONSTATIONARY = "nonstationary"


@dataclass(frozen=True)
class TestConfig:
    """Every tuning choice of the randomised test."""

    __test__ = False  # not a pytest class

    beta: float = 1.25
    g: GFunction = GFunction.DOUBLE_EXP
    r_rule: Union[EqualT, FixedR, RatioR] = field(default_factory=EqualT)
    alpha: float = 0.05
    xi_dist: Dist = field(default_factory=lambda: Gaussian(1.0))
    u_dist: Dist = field(default_factory=lambda: TwoPoint(math.sqrt(2.0)))
    null: NullOrientation = NullOrientation.STATIONARY
    s_reps: int = 1000
    critical_law: CriticalLaw = CriticalLaw.CHI2
    diagnostic: DiagnosticConfig = field(default_factory=DiagnosticConfig)

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ParameterError("beta must be positive")
        if not 0 < self.alpha < 1:
            raise ParameterError("alpha must lie in (0, 1)")
        if int(self.s_reps) != self.s_reps or self.s_reps < 1:
            raise ParameterError("s_reps must be a positive integer")
        object.__setattr__(self, "g", GFunction(self.g))
        object.__setattr__(self, "null", NullOrientation(self.null))
        object.__setattr__(self, "critical_law", CriticalLaw(self.critical_law))
        self.u_dist.atoms()  # must be discrete
        g0 = self.g0
        if not 0 < g0 < 1:
            raise ParameterError(f"xi_dist must have 0 < G(0) < 1, got G(0) = {g0}")

    @property
    def g0(self) -> float:
        return self.xi_dist.cdf(0.0)

    def psi(self, T: int) -> float:
        return math.log(T) ** self.beta

    def critical_value(self) -> float:
        if self.critical_law is CriticalLaw.CHI2:
            return float(stats.chi2.isf(self.alpha, 1))
        return float(stats.norm.isf(self.alpha))

    def p_value(self, theta: float) -> float:
        if self.critical_law is CriticalLaw.CHI2:
            return float(stats.chi2.sf(theta, 1))
        return float(stats.norm.sf(theta))


@dataclass(frozen=True)
class ThetaDetails:
    thresholds: tuple
    counts: tuple
    varthetas: tuple
    weights: tuple


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    theta: float
    l_t: float
    d_t: float
    v_p: float
    p: int
    T: int
    R: int
    critical_value: float
    p_value: float
    reject: bool
    null: NullOrientation

    def to_dict(self) -> dict:
        out = asdict(self)
        out["null"] = self.null.value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TestOutcome":
        data = dict(data)
        data["null"] = NullOrientation(data["null"])
        for key in ("p", "T", "R"):
            data[key] = int(data[key])
        for key in ("theta", "l_t", "d_t", "v_p", "critical_value", "p_value"):
            data[key] = float(data[key])
        reject = data["reject"]
        data["reject"] = reject if isinstance(reject, bool) else str(reject).lower() == "true"
        return cls(**data)


@dataclass(frozen=True)
class DecisionReport:
    q_alpha: float
    bound: float
    accept_null: bool
    null: NullOrientation
    s_used: int
    alpha: float
    critical_value: float
    d_t: float
    l_t: float
    T: int
    R: int

    @property
    def decision(self) -> Verdict:
        stationary_null = self.null is NullOrientation.STATIONARY
        if self.accept_null == stationary_null:
            return Verdict.STATIONARY
        return Verdict.NONSTATIONARY

    def to_dict(self) -> dict:
        out = asdict(self)
        out["null"] = self.null.value
        out["decision"] = self.decision.value
        return out


def lt_argument(d_t: float, T: int, cfg: TestConfig) -> float:
    """Argument fed to ``g``: ``psi(T) D_T`` or its reciprocal."""
    x = cfg.psi(T) * d_t
    if cfg.null is NullOrientation.STATIONARY:
        return x
    return math.inf if x == 0 else 1.0 / x


def compute_lT(d_t: float, T: int, cfg: TestConfig = TestConfig()) -> float:
    """``l_T`` for the configured null orientation; may be ``+inf``.

    Saturation is deliberate: only the threshold ``u / sqrt(l_T)`` is used
    downstream, and ``+inf`` maps to the exact limit 0.
    """
    if not 0.0 <= d_t <= 1.0:
        raise ParameterError(f"D_T must lie in [0, 1], got {d_t}")
    if T < 3:
        raise ParameterError("T must be at least 3")
    return cfg.g(lt_argument(d_t, T, cfg))


def _thresholds(l_t: float, atoms) -> np.ndarray:
    out = []
    for u, _ in atoms:
        if math.isinf(l_t):
            out.append(0.0)
        elif l_t == 0.0:
            out.append(math.copysign(math.inf, u) if u != 0 else math.inf)
        else:
            out.append(u / math.sqrt(l_t))
    return np.array(out, dtype=np.float64)


def _theta_from_counts(counts: np.ndarray, R: int, g0: float, weights: np.ndarray):
    var = R * g0 * (1.0 - g0)
    dev = counts - R * g0
    # Theta from squared deviations, so that l_T = 0 gives Theta = R exactly
    theta = ((dev * dev) / var) @ weights
    return dev / math.sqrt(var), theta


def _theta_parts(xi: np.ndarray, l_t: float, cfg: TestConfig):
    atoms = cfg.u_dist.atoms()
    thr = _thresholds(l_t, atoms)
    weights = np.array([w for _, w in atoms])
    counts = _backend.threshold_counts(xi, thr)
    varthetas, theta = _theta_from_counts(counts, xi.shape[1], cfg.g0, weights)
    return theta, varthetas, counts, thr, weights


def theta_from_draws(xi, l_t: float, cfg: TestConfig = TestConfig()) -> np.ndarray:
    """``Theta`` for explicit draws ``xi``, one randomisation per row."""
    xi = np.atleast_2d(np.asarray(xi, dtype=np.float64))
    return _theta_parts(xi, l_t, cfg)[0]


def randomized_theta(l_t: float, R: int, cfg: TestConfig, stream: RngStream):
    """One randomisation: draw ``xi_1..xi_R`` from ``stream`` and form ``Theta``."""
    if int(R) != R or R < 1:
        raise ParameterError("R must be a positive integer")
    xi = draw(stream, cfg.xi_dist, int(R))[np.newaxis, :]
    theta, varthetas, counts, thr, weights = _theta_parts(xi, l_t, cfg)
    details = ThetaDetails(
        thresholds=tuple(thr.tolist()),
        counts=tuple(counts[0].tolist()),
        varthetas=tuple(varthetas[0].tolist()),
        weights=tuple(weights.tolist()),
    )
    return float(theta[0]), details


def _check_restriction(T: int, R: int, cfg: TestConfig):
    if isinstance(cfg.r_rule, EqualT) or cfg.null is not NullOrientation.STATIONARY:
        return
    if math.sqrt(R) > cfg.g(cfg.psi(T)):
        logger.warning(
            "R=%d is large for T=%d: sqrt(R) exceeds g(psi(T)) = %.4g, expect size distortion",
            R, T, cfg.g(cfg.psi(T)),
        )


def _prepare(series, cfg: TestConfig):
    T = len(series)
    if T < MIN_TEST_LENGTH:
        raise InsufficientDataError(f"the test needs at least {MIN_TEST_LENGTH} observations, got {T}")
    diag = compute_diagnostic(series, cfg.diagnostic)
    R = cfg.r_rule.size(T)
    _check_restriction(T, R, cfg)
    l_t = compute_lT(diag.d_t, T, cfg)
    return diag, R, l_t


def run_test(series, cfg: TestConfig = TestConfig(), stream: RngStream = RngStream(0)) -> TestOutcome:
    """Single randomised test of the configured null."""
    diag, R, l_t = _prepare(series, cfg)
    theta, _ = randomized_theta(l_t, R, cfg, stream)
    crit = cfg.critical_value()
    return TestOutcome(
        theta=theta,
        l_t=l_t,
        d_t=diag.d_t,
        v_p=diag.v_p,
        p=diag.p,
        T=diag.T,
        R=R,
        critical_value=crit,
        p_value=cfg.p_value(theta),
        reject=theta >= crit,
        null=cfg.null,
    )


def decision_bound(alpha: float, S: int) -> float:
    """``(1 - alpha) - sqrt(alpha (1 - alpha)) sqrt(2 ln ln S / S)``."""
    if not 0 < alpha < 1:
        raise ParameterError("alpha must lie in (0, 1)")
    if S < 16:
        raise ParameterError(f"the strong rule needs S >= 16, got {S}")
    return (1.0 - alpha) - math.sqrt(alpha * (1.0 - alpha)) * math.sqrt(2.0 * math.log(math.log(S)) / S)


def strong_decide(series, cfg: TestConfig = TestConfig(), stream: RngStream = RngStream(0)) -> DecisionReport:
    """Repeat the randomisation ``S = cfg.s_reps`` times and apply the bound.

    ``D_T`` is computed once; repetition ``s`` draws its ``xi`` from
    ``stream.child(s)``, so the result does not depend on evaluation order.
    """
    S = int(cfg.s_reps)
    bound = decision_bound(cfg.alpha, S)
    diag, R, l_t = _prepare(series, cfg)
    crit = cfg.critical_value()
    below = 0
    rows = max(1, _BATCH_ELEMENTS // R)
    for start in range(0, S, rows):
        stop = min(S, start + rows)
        xi = np.empty((stop - start, R))
        for i, s in enumerate(range(start, stop)):
            xi[i] = draw(stream.child(s), cfg.xi_dist, R)
        theta = theta_from_draws(xi, l_t, cfg)
        below += int(np.count_nonzero(theta <= crit))
    q = below / S
    return DecisionReport(
        q_alpha=q,
        bound=bound,
        accept_null=q >= bound,
        null=cfg.null,
        s_used=S,
        alpha=cfg.alpha,
        critical_value=crit,
        d_t=diag.d_t,
        l_t=l_t,
        T=diag.T,
        R=R,
    )
