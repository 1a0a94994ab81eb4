"""Randomised tests for strict stationarity of RCAR(1) processes.

Quick start::

    from rcatest import RcarParams, RngStream, simulate, run_test, strong_decide

    x = simulate(RcarParams(phi=0.5), T=1000, stream=RngStream(1))
    outcome = run_test(x, stream=RngStream(2))
    report = strong_decide(x, stream=RngStream(3))
"""
from ._backend import BACKEND
from .diagnostic import (
    AutoP,
    DiagnosticConfig,
    DiagnosticResult,
    FixedP,
    Preprocess,
    compute_diagnostic,
    compute_vp,
    preprocess,
    preprocess_chain,
)
from .dgp import (
    Constant,
    LinearTrend,
    NoDeterministic,
    PiecewiseConstant,
    RcarParams,
    Regime,
    RegimeLabel,
    Sinusoid,
    TimeSeries,
    classify,
    lyapunov_gaussian,
    simulate,
    solve_boundary_sigma,
)
from .errors import (
    DataError,
    DegenerateSeriesError,
    DomainError,
    InsufficientDataError,
    NumericError,
    ParameterError,
    RcaError,
    SimulationOverflowError,
)
from .rngdist import Degenerate, Gaussian, RngStream, StudentT, TwoPoint, draw
from .rtest import (
    CriticalLaw,
    DecisionReport,
    EqualT,
    FixedR,
    GFunction,
    NullOrientation,
    RatioR,
    TestConfig,
    TestOutcome,
    Verdict,
    compute_lT,
    decision_bound,
    randomized_theta,
    run_test,
    strong_decide,
)

__version__ = "0.1.0"
