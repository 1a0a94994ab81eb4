"""Monte Carlo harness for rejection frequencies over scenario grids.

Replication ``r`` of scenario ``i`` uses the stream
``RngStream(master_seed).child(i, r)`` (and fixed children of it for the
simulation, the test and the strong rule), and results are reduced by
integer summation keyed on the scenario index.  The report is therefore
identical for any worker count or scheduling order.
"""
from __future__ import annotations

import csv
import enum
import io
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .dgp import RcarParams, RegimeLabel, classify, simulate
from .errors import ParameterError, SimulationOverflowError
from .rngdist import Gaussian, RngStream, StudentT
from .rtest import NullOrientation, TestConfig, run_test, strong_decide

__all__ = [
    "ErrorLaw",
    "McScenario",
    "McCell",
    "McReport",
    "run_grid",
    "size_confidence_band",
    "resolve_workers",
    "table_preset",
    "TABLE_NAMES",
    "WORKERS_ENV",
]

#: environment variable selecting the worker count (absent -> all cores)
WORKERS_ENV = "RCATEST_WORKERS"

_SIM_TAG, _TEST_TAG, _STRONG_TAG = 0, 1, 2
_CHUNK = 25


class ErrorLaw(enum.Enum):
    GAUSSIAN = "gaussian"
    T2 = "t2"
    T1 = "t1"

    def dist(self):
        if self is ErrorLaw.GAUSSIAN:
            return Gaussian(1.0)
        return StudentT(2.0 if self is ErrorLaw.T2 else 1.0)

    @property
    def heading(self) -> str:
        return {"gaussian": "e ~ N(0,1)", "t2": "e ~ t2", "t1": "e ~ t1"}[self.value]


@dataclass(frozen=True)
class McScenario:
    phi: float
    sigma_b2: float
    error_law: ErrorLaw
    T: int
    n_reps: int = 500
    test_cfg: TestConfig = field(default_factory=TestConfig)
    with_strong_rule: bool = False
    burn_in: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "error_law", ErrorLaw(self.error_law))
        if int(self.n_reps) != self.n_reps or self.n_reps < 1:
            raise ParameterError("n_reps must be a positive integer")
        if self.sigma_b2 < 0:
            raise ParameterError("sigma_b2 must be non-negative")

    def params(self) -> RcarParams:
        return RcarParams.gaussian_rcar(self.phi, self.sigma_b2, self.error_law.dist(), burn_in=self.burn_in)

    def regime(self) -> RegimeLabel:
        return classify(self.phi, self.sigma_b2)


@dataclass(frozen=True)
class McCell:
    scenario: McScenario
    rejections: int
    completed: int
    overflow_count: int
    strong_accepts: Optional[int]
    regime: RegimeLabel
    wall_time: float = field(default=0.0, compare=False)

    @property
    def n_reps(self) -> int:
        return self.scenario.n_reps

    @property
    def rejection_frequency(self) -> float:
        return self.rejections / self.completed if self.completed else math.nan

    @property
    def strong_accept_rate(self) -> Optional[float]:
        if self.strong_accepts is None:
            return None
        return self.strong_accepts / self.completed if self.completed else math.nan


CSV_COLUMNS = (
    "phi",
    "sigma_b2",
    "error_law",
    "T",
    "n_reps",
    "rejection_freq",
    "strong_accept_rate",
    "regime",
    "overflow_count",
)


@dataclass(frozen=True)
class McReport:
    cells: tuple
    master_seed: int

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in self.cells:
            sc = c.scenario
            rate = c.strong_accept_rate
            writer.writerow([
                repr(float(sc.phi)),
                repr(float(sc.sigma_b2)),
                sc.error_law.value,
                sc.T,
                sc.n_reps,
                repr(c.rejection_frequency),
                "" if rate is None else repr(rate),
                c.regime.regime.value,
                c.overflow_count,
            ])
        return buf.getvalue()

    def to_text(self) -> str:
        """Grid layout: rows ``(phi, sigma_b2)``, columns error law x T.

        Each cell shows the rejection frequency with the strong-rule accept
        rate in brackets beneath it when available.
        """
        rows, cols, lookup = [], [], {}
        for c in self.cells:
            sc = c.scenario
            r, k = (sc.phi, sc.sigma_b2), (sc.error_law, sc.T)
            if r not in rows:
                rows.append(r)
            if k not in cols:
                cols.append(k)
            lookup[r, k] = c
        width = 8
        lead = 18
        laws = []
        for law, _ in cols:
            if law not in laws:
                laws.append(law)
        head1 = " " * lead
        for law in laws:
            n = sum(1 for lw, _ in cols if lw is law)
            head1 += "|" + law.heading.center(n * width)
        head2 = "(phi, sigma_b2)".ljust(lead)
        for law in laws:
            head2 += "|" + "".join(str(T).rjust(width) for lw, T in cols if lw is law)
        lines = [head1, head2, "-" * len(head2)]
        any_strong = any(c.strong_accepts is not None for c in self.cells)
        for r in rows:
            label = f"({r[0]:g}, {r[1]:g})".ljust(lead)
            top, bottom = label, " " * lead
            for law in laws:
                top += "|"
                bottom += "|"
                for lw, T in cols:
                    if lw is not law:
                        continue
                    c = lookup.get((r, (lw, T)))
                    if c is None:
                        top += " " * width
                        bottom += " " * width
                        continue
                    top += f"{c.rejection_frequency:.3f}".rjust(width)
                    rate = c.strong_accept_rate
                    bottom += ("" if rate is None else f"({rate:.2f})").rjust(width)
            lines.append(top)
            if any_strong:
                lines.append(bottom)
        overflow = sum(c.overflow_count for c in self.cells)
        if overflow:
            lines.append(f"overflowed replications (excluded from frequencies): {overflow}")
        return "\n".join(lines)


def size_confidence_band(n_reps: int, alpha: float = 0.05, level: float = 0.95) -> tuple[float, float]:
    """Normal-approximation band for an empirical size estimate."""
    if int(n_reps) != n_reps or n_reps < 1:
        raise ParameterError("n_reps must be a positive integer")
    z = stats.norm.isf((1.0 - level) / 2.0)
    half = z * math.sqrt(alpha * (1.0 - alpha) / n_reps)
    return max(0.0, alpha - half), min(1.0, alpha + half)


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ParameterError("worker count must be at least 1")
    return int(workers)


def _run_chunk(task):
    index, scenario, start, stop, master_seed = task
    t0 = time.perf_counter()
    params = scenario.params()
    cfg = scenario.test_cfg
    rejections = completed = overflow = accepts = 0
    root = RngStream(master_seed)
    for r in range(start, stop):
        rep = root.child(index, r)
        try:
            x = simulate(params, scenario.T, rep.child(_SIM_TAG))
        except SimulationOverflowError:
            overflow += 1
            continue
        completed += 1
        rejections += run_test(x, cfg, rep.child(_TEST_TAG)).reject
        if scenario.with_strong_rule:
            accepts += strong_decide(x, cfg, rep.child(_STRONG_TAG)).accept_null
    return index, rejections, completed, overflow, accepts, time.perf_counter() - t0


def run_grid(
    scenarios: Sequence[McScenario],
    master_seed: int = 0,
    workers: Optional[int] = None,
    progress=None,
) -> McReport:
    """Run every scenario's replications and aggregate frequencies.

    Parameters
    ----------
    scenarios : sequence of McScenario
    master_seed : int
        Root seed; with it the report is fully reproducible.
    workers : int, optional
        Process count; defaults to ``$RCATEST_WORKERS`` or all cores.
    progress : callable, optional
        Called with ``(done_tasks, total_tasks)`` after each chunk.
    """
    scenarios = list(scenarios)
    if not scenarios:
        raise ParameterError("no scenarios given")
    workers = resolve_workers(workers)
    tasks = [
        (i, sc, start, min(sc.n_reps, start + _CHUNK), master_seed)
        for i, sc in enumerate(scenarios)
        for start in range(0, sc.n_reps, _CHUNK)
    ]
    totals = np.zeros((len(scenarios), 4), dtype=np.int64)
    times = np.zeros(len(scenarios))

    def absorb(result, done):
        i, rej, comp, ovf, acc, dt = result
        totals[i] += (rej, comp, ovf, acc)
        times[i] += dt
        if progress is not None:
            progress(done, len(tasks))

    if workers == 1:
        for done, task in enumerate(tasks, 1):
            absorb(_run_chunk(task), done)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for done, result in enumerate(pool.map(_run_chunk, tasks), 1):
                absorb(result, done)

    cells = []
    for i, sc in enumerate(scenarios):
        rej, comp, ovf, acc = (int(v) for v in totals[i])
        cells.append(McCell(
            scenario=sc,
            rejections=rej,
            completed=comp,
            overflow_count=ovf,
            strong_accepts=acc if sc.with_strong_rule else None,
            regime=sc.regime(),
            wall_time=float(times[i]),
        ))
    return McReport(tuple(cells), master_seed)


# scenario grids of the published size/power tables
TABLE_PHI = (1.05, 1.0, 0.95, 0.5, 0.0)
TABLE_SIGMA_B2 = (0.0, 0.1, 0.25)
BOUNDARY_PAIRS = (
    (0.2, 3.6190),
    (0.3, 3.5556),
    (0.4, 3.4460),
    (0.5, 3.3390),
    (0.6, 3.2245),
    (0.7, 3.1310),
    (0.8, 2.8650),
    (0.9, 2.6815),
    (1.0, 2.4440),
)
TABLE_T = (250, 500, 1000, 2000)
TABLE_NAMES = ("table1", "table2", "table3", "table4")


def table_preset(
    name: str,
    n_reps: int = 500,
    laws: Optional[Iterable] = None,
    sizes: Optional[Iterable[int]] = None,
    test_cfg: Optional[TestConfig] = None,
    with_strong_rule: Optional[bool] = None,
) -> list[McScenario]:
    """Scenario list for one of the four published grids.

    ``table1``/``table2`` test the stationarity null (with the strong rule),
    ``table3``/``table4`` the nonstationarity null; tables 2 and 4 use the
    boundary pairs with ``E ln|phi + b| = 0``.
    """
    if name not in TABLE_NAMES:
        raise ParameterError(f"unknown preset {name!r}; choose from {', '.join(TABLE_NAMES)}")
    laws = [ErrorLaw(l) for l in (laws or list(ErrorLaw))]
    sizes = list(sizes or TABLE_T)
    stationary_null = name in ("table1", "table2")
    null = NullOrientation.STATIONARY if stationary_null else NullOrientation.NONSTATIONARY
    cfg = replace(test_cfg or TestConfig(), null=null)
    strong = stationary_null if with_strong_rule is None else with_strong_rule
    if name in ("table1", "table3"):
        pairs = [(phi, s2) for phi in TABLE_PHI for s2 in TABLE_SIGMA_B2]
    else:
        pairs = list(BOUNDARY_PAIRS)
    return [
        McScenario(phi, s2, law, T, n_reps, cfg, strong)
        for phi, s2 in pairs
        for law in laws
        for T in sizes
    ]
