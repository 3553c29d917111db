"""
Fixed-point solvers for both value-function formulations.

Three engines are provided:

- ``vfi``: plain successive approximations, linearly convergent at
  rate beta.
- ``poly_solve``: the hybrid polyalgorithm -- a short VFI warm-up
  until a switch rule fires, then Newton-Kantorovich steps
  x <- x - (I - T')^{-1} (x - T(x)) with a dense LU solve per step.
  Newton is locally quadratic, so a handful of steps finishes the job
  that VFI alone would need O(1/(1-beta)) iterations for.
- ``newton_step_reduced`` / ``solve_reduced_bus``: for binary
  replacement models whose replace-transition rows all equal the
  first keep row, the EV system collapses to the keep block alone
  (the replace block is pinned to EV_1(0)), cutting the Newton system
  from 2|X| to |X| unknowns.

Every run can record a trace of (iteration, method, sup_diff,
residual, step time) rows; sup_diff is the sup-norm change in the
iterate and residual is the sup-norm of x - T(x) at that iterate.
The residual of a trace row is obtained from the next operator
evaluation, so it costs nothing extra except one final application
after the loop ends.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np

from .core import ModelSpec
from .models import is_bus_like
from .operators import (
    _lse_over_choices,
    _softmax_over_choices,
    bellman_ev,
    bellman_w,
    ccp_from_ev,
    ccp_from_w,
    dbellman_ev,
    dbellman_w,
)

TRACE_CSV_HEADER = ("k", "method", "sup_diff", "residual", "step_time_s")

# Newton steps that fail to improve the best sup_diff this many times
# in a row are treated as having hit the floating-point floor.
_STALL_LIMIT = 5


class NumericError(RuntimeError):
    """Numerical failure inside a solver (non-finite iterate, singular system)."""


@dataclass(frozen=True)
class FixedCount:
    """Switch to Newton after exactly `count` VFI iterations."""

    count: int


@dataclass(frozen=True)
class ContractionRatio:
    """
    Switch to Newton once the observed contraction ratio
    sup_diff_k / sup_diff_{k-1} reaches `threshold` (the iteration has
    settled into its asymptotic linear regime, so further VFI gains
    little).
    """

    threshold: float


SwitchRule = Union[FixedCount, ContractionRatio, None]


@dataclass(frozen=True)
class SolveOptions:
    """
    Solver controls.

    tol_fixed_point is the sup-norm tolerance on the change in the
    iterate; tol_residual bounds the Bellman residual ||x - T(x)|| a
    converged solution must satisfy.  switch_rule=None uses the
    default hybrid rule: enter Newton as soon as sup_diff < 1 or
    after 20 VFI iterations, whichever comes first.
    """

    tol_fixed_point: float = 1e-13
    tol_residual: float = 1e-12
    max_iters: int = 1000
    switch_rule: SwitchRule = None
    record_trace: bool = False

    def __post_init__(self):
        if self.tol_fixed_point <= 0 or self.tol_residual <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class TraceRow:
    k: int
    method: str  # "VFI" or "Newton"
    sup_diff: float
    residual: float
    step_time_s: float


@dataclass(frozen=True)
class SolveTrace:
    """Per-iteration convergence record."""

    rows: tuple[TraceRow, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_CSV_HEADER)
        for row in self.rows:
            writer.writerow(
                [
                    row.k,
                    row.method,
                    f"{row.sup_diff:.17g}",
                    f"{row.residual:.17g}",
                    f"{row.step_time_s:.9f}",
                ]
            )
        return buf.getvalue()

    def write_csv(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_csv())


@dataclass(frozen=True)
class SolveResult:
    """Solved model: solution iterate, convergence info, CCPs, trace."""

    solution: np.ndarray
    formulation: str
    converged: bool
    trace: SolveTrace
    ccp: np.ndarray
    n_iterations: int
    final_sup_diff: float
    final_residual: float


def _normalize_formulation(formulation: str) -> str:
    form = str(formulation).upper()
    if form not in ("W", "EV"):
        raise ValueError(f"formulation must be 'W' or 'EV', got {formulation!r}")
    return form


def _start_iterate(spec: ModelSpec, formulation: str, start) -> np.ndarray:
    shape = (spec.n_states,) if formulation == "W" else (spec.n_choices, spec.n_states)
    if start is None:
        return np.zeros(shape)
    start = np.asarray(start, dtype=np.float64)
    if start.shape != shape:
        raise ValueError(f"start iterate has shape {start.shape}, expected {shape}")
    return start.copy()


def newton_system_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    """The |X| x |X| Newton matrix I - dbellman_w(spec, w)."""
    a = dbellman_w(spec, w)
    np.negative(a, out=a)
    a.ravel()[:: spec.n_states + 1] += 1.0
    return a


def newton_system_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    """The J|X| x J|X| Newton matrix I - dbellman_ev(spec, ev)."""
    a = dbellman_ev(spec, ev)
    np.negative(a, out=a)
    a.ravel()[:: spec.n_choices * spec.n_states + 1] += 1.0
    return a


def _lu_solve(a: np.ndarray, rhs: np.ndarray, k: Optional[int] = None) -> np.ndarray:
    # dense LU with partial pivoting (LAPACK gesv)
    try:
        return np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        where = "" if k is None else f" at iteration {k}"
        raise NumericError(f"singular Newton system{where}: {exc}") from exc


def newton_step_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    """One Newton-Kantorovich step on the W fixed-point system."""
    residual = w - bellman_w(spec, w)
    return w - _lu_solve(newton_system_w(spec, w), residual)


def newton_step_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    """One Newton-Kantorovich step on the stacked EV fixed-point system."""
    residual = (ev - bellman_ev(spec, ev)).ravel()
    delta = _lu_solve(newton_system_ev(spec, ev), residual)
    return ev - delta.reshape(ev.shape)


def _switch_fires(
    rule: SwitchRule, k_vfi: int, sup_diff: float, prev_sup_diff: float
) -> bool:
    if isinstance(rule, FixedCount):
        return k_vfi >= rule.count
    if isinstance(rule, ContractionRatio):
        return (
            k_vfi >= 2
            and np.isfinite(prev_sup_diff)
            and prev_sup_diff > 0
            and sup_diff / prev_sup_diff >= rule.threshold
        )
    return sup_diff < 1.0 or k_vfi >= 20


def _drive(
    spec: ModelSpec,
    formulation: str,
    start,
    opts: SolveOptions,
    allow_newton: bool,
) -> SolveResult:
    form = _normalize_formulation(formulation)
    apply_op: Callable = bellman_w if form == "W" else bellman_ev
    x = _start_iterate(spec, form, start)

    ks: list[int] = []
    methods: list[str] = []
    sup_diffs: list[float] = []
    residuals: list[Optional[float]] = []
    step_times: list[float] = []

    def patch_residual(value: float) -> None:
        if residuals and residuals[-1] is None:
            residuals[-1] = value

    k = 0
    k_vfi = 0
    sup_diff = np.inf
    prev_sup_diff = np.inf
    in_newton = allow_newton and _switch_fires(opts.switch_rule, 0, np.inf, np.inf)
    converged_on_diff = False

    # VFI phase
    while not in_newton and k < opts.max_iters:
        t0 = time.perf_counter()
        tx = apply_op(spec, x)
        elapsed = time.perf_counter() - t0
        if not np.isfinite(tx).all():
            raise NumericError(f"non-finite iterate at iteration {k + 1}")
        prev_sup_diff = sup_diff
        sup_diff = float(np.abs(tx - x).max())
        patch_residual(sup_diff)  # ||x_k - T(x_k)|| of the previous row
        x = tx
        k += 1
        k_vfi += 1
        ks.append(k)
        methods.append("VFI")
        sup_diffs.append(sup_diff)
        residuals.append(None)
        step_times.append(elapsed)
        if sup_diff <= opts.tol_fixed_point:
            converged_on_diff = True
            break
        if allow_newton and _switch_fires(opts.switch_rule, k_vfi, sup_diff, prev_sup_diff):
            in_newton = True

    # Newton phase
    if in_newton and not converged_on_diff:
        best_sup_diff = np.inf
        stalls = 0
        while k < opts.max_iters:
            t0 = time.perf_counter()
            tx = apply_op(spec, x)
            residual_vec = (x - tx).ravel()
            residual_norm = float(np.abs(residual_vec).max())
            patch_residual(residual_norm)
            if not np.isfinite(residual_norm):
                raise NumericError(f"non-finite iterate at iteration {k + 1}")
            if residual_norm == 0.0:
                break  # exact fixed point; a step would be a no-op
            system = (
                newton_system_w(spec, x) if form == "W" else newton_system_ev(spec, x)
            )
            delta = _lu_solve(system, residual_vec, k + 1)
            x = x - delta.reshape(x.shape)
            elapsed = time.perf_counter() - t0
            sup_diff = float(np.abs(delta).max())
            k += 1
            ks.append(k)
            methods.append("Newton")
            sup_diffs.append(sup_diff)
            residuals.append(None)
            step_times.append(elapsed)
            if sup_diff <= opts.tol_fixed_point:
                break
            # sup_diff has hit the floating-point floor when it stops
            # improving; the residual check below still decides success
            if sup_diff < best_sup_diff:
                best_sup_diff = sup_diff
                stalls = 0
            else:
                stalls += 1
                if stalls >= _STALL_LIMIT:
                    break

    # one extra evaluation to pin down the final residual
    final_residual = float(np.abs(apply_op(spec, x) - x).max())
    patch_residual(final_residual)
    converged = final_residual <= opts.tol_residual

    rows: tuple[TraceRow, ...] = ()
    if opts.record_trace:
        rows = tuple(
            TraceRow(k=ki, method=m, sup_diff=s, residual=float(r), step_time_s=t)
            for ki, m, s, r, t in zip(ks, methods, sup_diffs, residuals, step_times)
        )
    ccp = ccp_from_w(spec, x) if form == "W" else ccp_from_ev(spec, x)
    return SolveResult(
        solution=x,
        formulation=form,
        converged=converged,
        trace=SolveTrace(rows),
        ccp=ccp,
        n_iterations=k,
        final_sup_diff=float(sup_diffs[-1]) if sup_diffs else 0.0,
        final_residual=final_residual,
    )


def vfi(
    spec: ModelSpec,
    formulation: str,
    start=None,
    opts: Optional[SolveOptions] = None,
) -> SolveResult:
    """Solve by successive approximations only."""
    return _drive(spec, formulation, start, opts or SolveOptions(), allow_newton=False)


def poly_solve(
    spec: ModelSpec,
    formulation: str,
    opts: Optional[SolveOptions] = None,
    start=None,
) -> SolveResult:
    """
    Solve by the hybrid polyalgorithm: VFI until the switch rule
    fires, then Newton-Kantorovich steps.  Use
    ``switch_rule=FixedCount(0)`` for pure Newton from the start.
    """
    return _drive(spec, formulation, start, opts or SolveOptions(), allow_newton=True)


def _reduced_parts(spec: ModelSpec, ev1: np.ndarray):
    """Reduced keep-block operator value and its derivative."""
    f_keep = spec.transitions[0]
    b = spec.beta
    v = np.vstack([spec.utility[0] + b * ev1, spec.utility[1] + b * ev1[0]])
    m = _lse_over_choices(v)
    p = _softmax_over_choices(v)
    value = f_keep @ m
    # chain rule: m depends on ev1 pointwise through the keep value and
    # on ev1[0] through the replace value, hence the extra column-0 term
    jac = b * f_keep * p[0][None, :]
    jac[:, 0] += b * (f_keep @ p[1])
    return value, jac


def _check_reduced_args(spec: ModelSpec, ev1: np.ndarray) -> np.ndarray:
    if not is_bus_like(spec):
        raise ValueError(
            "reduced Newton step needs a binary replacement model whose "
            "replace-transition rows all equal row 0 of the keep transition "
            "(the corrected variant)"
        )
    ev1 = np.asarray(ev1, dtype=np.float64)
    if ev1.shape != (spec.n_states,):
        raise ValueError(
            f"reduced iterate has shape {ev1.shape}, expected {(spec.n_states,)}"
        )
    return ev1


def newton_step_reduced(spec: ModelSpec, ev1: np.ndarray) -> np.ndarray:
    """
    One Newton step on the reduced keep-block system of a corrected
    replacement model.

    The replace block is implied by the regenerative identity
    EV_2(x) = EV_1(0), so only the |X| keep values are unknowns and
    the linear solve is |X| x |X| instead of 2|X| x 2|X|.
    """
    ev1 = _check_reduced_args(spec, ev1)
    value, jac = _reduced_parts(spec, ev1)
    system = -jac
    system.ravel()[:: spec.n_states + 1] += 1.0
    return ev1 - _lu_solve(system, ev1 - value)


def solve_reduced_bus(
    spec: ModelSpec,
    start=None,
    tol_fixed_point: float = 1e-13,
    max_iters: int = 100,
    warmup_iters: int = 10,
) -> tuple[np.ndarray, bool]:
    """
    Drive the reduced system to a fixed point: a few successive
    approximations to warm up, then Newton steps until the iterate
    change falls below tol_fixed_point (or stops improving at the
    floating-point floor).  Returns (keep-block EV, converged flag).
    """
    ev1 = _check_reduced_args(
        spec, np.zeros(spec.n_states) if start is None else start
    )
    for _ in range(warmup_iters):
        ev1 = _reduced_parts(spec, ev1)[0]
    best = np.inf
    stalls = 0
    converged = False
    for _ in range(max_iters):
        nxt = newton_step_reduced(spec, ev1)
        sup_diff = float(np.abs(nxt - ev1).max())
        ev1 = nxt
        if sup_diff <= tol_fixed_point:
            converged = True
            break
        if sup_diff < best:
            best = sup_diff
            stalls = 0
        else:
            stalls += 1
            if stalls >= _STALL_LIMIT:
                value, _ = _reduced_parts(spec, ev1)
                converged = float(np.abs(ev1 - value).max()) <= 1e-10 * max(
                    1.0, float(np.abs(ev1).max())
                )
                break
    return ev1, converged
