"""
Constraint-system structure for MPEC-style estimation.

Constrained maximum likelihood keeps the Bellman equations as
equality constraints.  Which formulation those constraints are
written in matters for the optimizer: the W system has one constraint
per state, the EV system one per (choice, state) pair, so the EV
system is exactly J times larger and its Jacobian correspondingly
denser in absolute terms.  This module builds both residual systems
and measures their size and Jacobian sparsity; it does not solve any
estimation problem.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ModelSpec
from .operators import bellman_ev, bellman_w
from .solvers import SolveOptions, newton_system_ev, newton_system_w, poly_solve

JACOBIAN_ZERO_TOL = 1e-15


@dataclass(frozen=True)
class ConstraintSystem:
    """
    Equality constraints x = T(x) of one formulation.

    residual maps an iterate to x - T(x); jacobian_nnz counts the
    entries of I - T' larger than ``JACOBIAN_ZERO_TOL`` in magnitude
    at the evaluation point the system was built at.
    """

    formulation: str
    n_constraints: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian_nnz: int
    jacobian_dims: tuple[int, int]


@dataclass(frozen=True)
class SystemComparison:
    """Size and sparsity of the EV system relative to the W system."""

    w_system: ConstraintSystem
    ev_system: ConstraintSystem
    ratio_constraints: float
    ratio_nnz: float

    def to_json_dict(self) -> dict:
        return {
            "formulation_w": {
                "n_constraints": self.w_system.n_constraints,
                "jacobian_nnz": self.w_system.jacobian_nnz,
            },
            "formulation_ev": {
                "n_constraints": self.ev_system.n_constraints,
                "jacobian_nnz": self.ev_system.jacobian_nnz,
            },
            "ratio_constraints": self.ratio_constraints,
            "ratio_nnz": self.ratio_nnz,
        }


def _solved_point(spec: ModelSpec, formulation: str) -> np.ndarray:
    return poly_solve(spec, formulation, SolveOptions()).solution


def build_constraints(
    spec: ModelSpec,
    formulation: str,
    at: Optional[np.ndarray] = None,
) -> ConstraintSystem:
    """
    Build the constraint system of one formulation.

    Parameters
    ----------
    spec : ModelSpec
        The model whose Bellman equations become constraints.
    formulation : str
        'W' (|X| constraints) or 'EV' (J|X| constraints).
    at : numpy.ndarray, optional
        Point at which the Jacobian nonzero count is taken.  Defaults
        to the solved fixed point.
    """
    form = str(formulation).upper()
    if form == "W":
        n_constraints = spec.n_states

        def residual(w: np.ndarray) -> np.ndarray:
            return np.asarray(w, dtype=np.float64) - bellman_w(spec, w)

        point = _solved_point(spec, "W") if at is None else at
        system = newton_system_w(spec, np.asarray(point, dtype=np.float64))
    elif form == "EV":
        n_constraints = spec.n_choices * spec.n_states

        def residual(ev: np.ndarray) -> np.ndarray:
            ev = np.asarray(ev, dtype=np.float64)
            return ev - bellman_ev(spec, ev)

        point = _solved_point(spec, "EV") if at is None else at
        system = newton_system_ev(spec, np.asarray(point, dtype=np.float64))
    else:
        raise ValueError(f"formulation must be 'W' or 'EV', got {formulation!r}")

    nnz = int((np.abs(system) > JACOBIAN_ZERO_TOL).sum())
    return ConstraintSystem(
        formulation=form,
        n_constraints=n_constraints,
        residual=residual,
        jacobian_nnz=nnz,
        jacobian_dims=(n_constraints, n_constraints),
    )


def compare_systems(spec: ModelSpec) -> SystemComparison:
    """
    Build both constraint systems at their solved fixed points and
    report the EV/W ratios of constraint counts (exactly J) and
    Jacobian nonzeros.
    """
    w_system = build_constraints(spec, "W")
    ev_system = build_constraints(spec, "EV")
    return SystemComparison(
        w_system=w_system,
        ev_system=ev_system,
        ratio_constraints=ev_system.n_constraints / w_system.n_constraints,
        ratio_nnz=ev_system.jacobian_nnz / w_system.jacobian_nnz,
    )
