"""
Timing harness comparing Newton-step costs across formulations.

For each model family and state-space size the harness warm-starts
both formulations identically (a short VFI run on W, mapped into an
EV stack), then times two quantities per formulation:

- "step": applying the Newton update given a precomputed system
  matrix I - T' and residual -- the dense linear solve plus the
  vector update;
- "total": one full Newton iteration -- operator evaluation, choice
  probabilities, derivative assembly, and the step.

Each quantity is the minimum over repeated runs (minimum is the
standard low-noise estimator for compute-bound kernels).  Timed
regions are pinned to a single BLAS thread so EV/W ratios compare
like with like.  Absolute times are hardware-bound; only the ratios
are meaningful across machines.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import numpy as np
from threadpoolctl import threadpool_limits

from .core import ModelSpec
from .models import (
    BusModelConfig,
    StorableGoodsConfig,
    build_bus_model,
    build_storable_goods_model,
)
from .operators import bellman_ev, bellman_w, ev_from_w
from .solvers import (
    SolveOptions,
    SolveResult,
    _lu_solve,
    newton_step_ev,
    newton_step_w,
    newton_system_ev,
    newton_system_w,
    poly_solve,
)

BENCH_CSV_HEADER = (
    "model",
    "n_states",
    "n_choices",
    "reps",
    "time_step_ev_s",
    "time_step_w_s",
    "time_total_ev_s",
    "time_total_w_s",
    "ratio_step",
    "ratio_total",
)

MIN_REPS = 3
WARMSTART_VFI_ITERS = 20

# per-measurement wall-clock budget used to pick how many timed calls
# back the minimum; sub-millisecond kernels get hundreds of samples
_SAMPLE_BUDGET_S = 0.5
_MAX_SAMPLES = 400


@dataclass(frozen=True)
class BenchRow:
    model: str
    n_states: int
    n_choices: int
    reps: int
    time_step_ev_s: float
    time_step_w_s: float
    time_total_ev_s: float
    time_total_w_s: float

    @property
    def ratio_step(self) -> float:
        return self.time_step_ev_s / self.time_step_w_s

    @property
    def ratio_total(self) -> float:
        return self.time_total_ev_s / self.time_total_w_s

    def __post_init__(self):
        if self.reps < MIN_REPS:
            raise ValueError(f"need at least {MIN_REPS} reps, got {self.reps}")
        times = (
            self.time_step_ev_s,
            self.time_step_w_s,
            self.time_total_ev_s,
            self.time_total_w_s,
        )
        if any(t <= 0 for t in times):
            raise ValueError(f"benchmark times must be positive, got {times}")


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(BENCH_CSV_HEADER)
        for r in self.rows:
            writer.writerow(
                [
                    r.model,
                    r.n_states,
                    r.n_choices,
                    r.reps,
                    f"{r.time_step_ev_s:.9e}",
                    f"{r.time_step_w_s:.9e}",
                    f"{r.time_total_ev_s:.9e}",
                    f"{r.time_total_w_s:.9e}",
                    f"{r.ratio_step:.6f}",
                    f"{r.ratio_total:.6f}",
                ]
            )
        return buf.getvalue()

    def write_csv(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_csv())


def _best_time(fn: Callable[[], object], reps: int) -> float:
    """Minimum wall time of fn over many calls, at least `reps` of them."""
    fn()  # warm up caches, allocator, code paths
    t0 = time.perf_counter()
    fn()
    estimate = time.perf_counter() - t0
    n_calls = max(reps, min(_MAX_SAMPLES, int(_SAMPLE_BUDGET_S / max(estimate, 1e-9))))
    best = np.inf
    for _ in range(n_calls):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _spec_for(model: str, size: int, base_config=None) -> ModelSpec:
    if model == "bus":
        cfg = base_config if base_config is not None else BusModelConfig()
        if not isinstance(cfg, BusModelConfig):
            raise ValueError("bus benchmarks need a BusModelConfig")
        return build_bus_model(replace(cfg, n_states=size))
    if model == "storable":
        cfg = base_config if base_config is not None else StorableGoodsConfig()
        if not isinstance(cfg, StorableGoodsConfig):
            raise ValueError("storable benchmarks need a StorableGoodsConfig")
        if size % cfg.price_levels != 0:
            raise ValueError(
                f"storable size {size} is not a multiple of "
                f"price_levels={cfg.price_levels}"
            )
        return build_storable_goods_model(
            replace(cfg, inventory_levels=size // cfg.price_levels)
        )
    raise ValueError(f"unknown model family {model!r}")


def _warm_start(spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    """Identical warm starts: a VFI iterate on W, mapped through ev_from_w."""
    w = np.zeros(spec.n_states)
    for _ in range(WARMSTART_VFI_ITERS):
        w = bellman_w(spec, w)
    return w, ev_from_w(spec, w)


def _bench_one(spec: ModelSpec, model: str, reps: int) -> BenchRow:
    w, ev = _warm_start(spec)

    time_total_w = _best_time(lambda: newton_step_w(spec, w), reps)
    time_total_ev = _best_time(lambda: newton_step_ev(spec, ev), reps)

    # step-only: system matrix and residual precomputed outside the clock
    system_w = newton_system_w(spec, w)
    resid_w = w - bellman_w(spec, w)
    system_ev = newton_system_ev(spec, ev)
    resid_ev = (ev - bellman_ev(spec, ev)).ravel()
    time_step_w = _best_time(lambda: w - _lu_solve(system_w, resid_w), reps)
    time_step_ev = _best_time(
        lambda: ev - _lu_solve(system_ev, resid_ev).reshape(ev.shape), reps
    )

    return BenchRow(
        model=model,
        n_states=spec.n_states,
        n_choices=spec.n_choices,
        reps=reps,
        time_step_ev_s=time_step_ev,
        time_step_w_s=time_step_w,
        time_total_ev_s=time_total_ev,
        time_total_w_s=time_total_w,
    )


def _global_warmup() -> None:
    # absorb cold-start effects (allocator, BLAS init, CPU ramp-up)
    # before anything is timed
    rng = np.random.default_rng(0)
    a = rng.standard_normal((400, 400))
    for _ in range(3):
        np.linalg.solve(a + 400 * np.eye(400), rng.standard_normal(400))


def bench_newton(
    model: str,
    sizes: Sequence[int],
    reps: int = 5,
    base_config=None,
) -> BenchReport:
    """
    Time Newton-step costs for one model family over a size sweep.

    Parameters
    ----------
    model : str
        'bus' or 'storable'.
    sizes : sequence of int
        State-space sizes |X|.  For the storable family each size must
        be a multiple of the price grid.
    reps : int
        Minimum number of timed repetitions per measurement (>= 3).
    base_config : optional
        Family config used as the template; only its size field is
        swept.
    """
    if reps < MIN_REPS:
        raise ValueError(f"need at least {MIN_REPS} reps, got {reps}")
    if not sizes:
        raise ValueError("sizes must be non-empty")
    specs = [_spec_for(model, int(s), base_config) for s in sizes]
    rows = []
    with threadpool_limits(limits=1):
        _global_warmup()
        for spec in specs:
            rows.append(_bench_one(spec, model, reps))
    return BenchReport(tuple(rows))


def trace_convergence(
    spec: ModelSpec,
    formulation: str,
    opts: Optional[SolveOptions] = None,
    csv_path: Optional[Union[str, Path]] = None,
) -> SolveResult:
    """
    Run the hybrid solver with trace recording on and optionally write
    the trace CSV.  Returns the full SolveResult.
    """
    opts = opts or SolveOptions()
    if not opts.record_trace:
        opts = replace(opts, record_trace=True)
    result = poly_solve(spec, formulation, opts)
    if csv_path is not None:
        result.trace.write_csv(csv_path)
    return result
