"""Convergence, spatial-accuracy, stability and energy studies.

Each study expands a :class:`RunConfig` into independent cells
``(method, epsilon, tau, h)``, runs them (optionally in worker processes,
count taken from ``KGEWI_WORKERS``) and assembles one :class:`ErrorRecord`
per cell in a fixed order, so the output does not depend on scheduling.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..ewi import InstabilityError, StabilityWarning, integrate
from ..problem import energy
from ..rk4 import integrate_rk4
from .config import RunConfig, parse_method
from .reference import compute_reference, h1_error_vs_reference

__all__ = [
    "CSV_COLUMNS",
    "TRACE_COLUMNS",
    "WORKERS_ENV",
    "Cell",
    "ErrorRecord",
    "EnergyTrace",
    "worker_count",
    "run_cell",
    "fill_rates",
    "run_solve",
    "run_temporal_study",
    "run_spatial_study",
    "run_stability_study",
    "run_energy_trace",
    "records_to_csv",
    "traces_to_csv",
]

CSV_COLUMNS = ("epsilon", "tau", "h", "method", "order", "h1_error", "rate",
               "wall_time_s", "max_energy_rel_error")
TRACE_COLUMNS = ("method", "order", "epsilon", "tau", "h", "step", "t", "energy", "rel_error")
WORKERS_ENV = "KGEWI_WORKERS"


@dataclass(frozen=True)
class Cell:
    method: str
    epsilon: float
    tau: float
    h: float


@dataclass
class ErrorRecord:
    epsilon: float
    tau: float
    h: float
    method: str
    order: int
    h1_error: float
    rate: float | None = None
    wall_time_s: float = math.nan
    max_energy_rel_error: float = math.nan

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class EnergyTrace:
    method: str
    order: int
    epsilon: float
    tau: float
    h: float
    steps: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)

    @property
    def rel_error(self) -> np.ndarray:
        return np.abs(self.energy - self.energy[0]) / abs(self.energy[0])


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def run_cell(config: RunConfig, cell: Cell, with_reference: bool = True, keep_trace: bool = False):
    """Integrate one cell; returns ``(ErrorRecord, EnergyTrace or None)``.

    An :class:`InstabilityError` becomes ``h1_error = inf``.
    """
    spec = parse_method(cell.method)
    problem = config.problem(cell.epsilon)
    grid = config.grid_for(cell.h)
    stride = config.energy_stride
    steps, times, energies = [], [], []

    def observer(n, state):
        steps.append(n)
        times.append(state.t)
        energies.append(energy(problem, grid, state))

    obs = observer if stride > 0 else None
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StabilityWarning)
            if spec.family == "rk4":
                final = integrate_rk4(problem, grid, cell.tau, config.T, observer=obs,
                                      stride=max(stride, 1), dealias=config.dealias)
            else:
                final = integrate(problem, grid, cell.tau, config.T, spec.order, observer=obs,
                                  stride=max(stride, 1), dealias=config.dealias)
    except InstabilityError:
        wall = time.perf_counter() - t0
        rec = ErrorRecord(cell.epsilon, cell.tau, cell.h, spec.family, spec.order, math.inf,
                          wall_time_s=wall if config.wall_time else math.nan)
        return rec, None
    wall = time.perf_counter() - t0
    err = math.nan
    if with_reference and config.reference:
        ref = compute_reference(config, cell.epsilon)
        err = h1_error_vs_reference(final, grid, ref)
    e = np.asarray(energies)
    max_rel = float(np.max(np.abs(e - e[0])) / abs(e[0])) if e.size else math.nan
    rec = ErrorRecord(cell.epsilon, cell.tau, cell.h, spec.family, spec.order, float(err),
                      wall_time_s=wall if config.wall_time else math.nan,
                      max_energy_rel_error=max_rel)
    trace = None
    if keep_trace and e.size:
        trace = EnergyTrace(spec.family, spec.order, cell.epsilon, cell.tau, cell.h,
                            np.asarray(steps), np.asarray(times), e)
    return rec, trace


def _job(args):
    config, cell, keep_trace = args
    return run_cell(config, cell, keep_trace=keep_trace)


def _run_cells(config: RunConfig, cells: list, keep_trace: bool = False, workers: int | None = None):
    if config.reference:
        # Build references serially first so workers only ever read the cache.
        for eps in sorted({c.epsilon for c in cells}, reverse=True):
            compute_reference(config, eps)
    workers = worker_count() if workers is None else workers
    jobs = [(config, c, keep_trace) for c in cells]
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            return list(pool.map(_job, jobs))
    return [_job(j) for j in jobs]


def fill_rates(records: list, key: str = "tau") -> list:
    """Set ``rate = log(e_prev / e) / log(x_prev / x)`` between neighbours in a column.

    Columns are runs of records sharing method, order and epsilon (plus ``tau``
    for an ``h`` ladder); ``key`` names the refined quantity.
    """
    prev = None
    for rec in records:
        col = (rec.method, rec.order, rec.epsilon) + ((rec.tau,) if key == "h" else (rec.h,))
        rec.rate = None
        if prev is not None and prev[0] == col:
            e0, x0 = prev[1], prev[2]
            e1, x1 = rec.h1_error, getattr(rec, key)
            if 0 < e0 < math.inf and 0 < e1 < math.inf and x0 != x1:
                rec.rate = math.log(e0 / e1) / math.log(x0 / x1)
        prev = (col, rec.h1_error, getattr(rec, key))
    return records


def run_solve(config: RunConfig, workers: int | None = None) -> list:
    """One record per method at ``(config.epsilon, config.tau, config.h)``."""
    cells = [Cell(m, config.epsilon, config.tau, config.h) for m in config.methods]
    return [r for r, _ in _run_cells(config, cells, workers=workers)]


def run_temporal_study(config: RunConfig, workers: int | None = None) -> list:
    """``tau`` ladder ``tau_k / 2^j`` for each ``(epsilon_k, tau_k)`` of the epsilon ladder."""
    cells = [Cell(m, eps, tau0 / 2**j, config.h)
             for m in config.methods
             for eps, tau0 in config.epsilon_ladder()
             for j in range(config.tau_levels)]
    records = [r for r, _ in _run_cells(config, cells, workers=workers)]
    return fill_rates(records, "tau")


def _h_values(config: RunConfig) -> tuple:
    return config.h_values or (config.h,)


def run_spatial_study(config: RunConfig, workers: int | None = None) -> list:
    """``h`` ladder from ``config.h_values`` at fixed ``config.tau`` for each epsilon level."""
    cells = [Cell(m, eps, config.tau, h)
             for m in config.methods
             for eps, _ in config.epsilon_ladder()
             for h in _h_values(config)]
    records = [r for r, _ in _run_cells(config, cells, workers=workers)]
    return fill_rates(records, "h")


def run_stability_study(config: RunConfig, workers: int | None = None) -> list:
    """Fixed, possibly large ``tau`` over the ``h`` values; no rates."""
    cells = [Cell(m, config.epsilon, config.tau, h) for m in config.methods for h in _h_values(config)]
    return [r for r, _ in _run_cells(config, cells, workers=workers)]


def run_energy_trace(config: RunConfig, workers: int | None = None):
    """Energy every ``energy_stride`` steps for each method over the ``tau`` ladder.

    Returns ``(records, traces)``; ``traces[i]`` belongs to ``records[i]`` and
    is ``None`` for a run that blew up.
    """
    if config.energy_stride < 1:
        config = config.replace(energy_stride=1)
    cells = [Cell(m, config.epsilon, config.tau / 2**j, config.h)
             for m in config.methods for j in range(config.tau_levels)]
    out = _run_cells(config, cells, keep_trace=True, workers=workers)
    records = fill_rates([r for r, _ in out], "tau") if config.reference else [r for r, _ in out]
    return records, [t for _, t in out]


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def records_to_csv(records: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_num(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def traces_to_csv(traces: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for tr in traces:
        if tr is None:
            continue
        rel = tr.rel_error
        for k in range(tr.steps.size):
            w.writerow([tr.method, tr.order, repr(tr.epsilon), repr(tr.tau), repr(tr.h),
                        int(tr.steps[k]), repr(float(tr.t[k])), repr(float(tr.energy[k])),
                        repr(float(rel[k]))])
    return buf.getvalue()
