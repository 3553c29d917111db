"""
Core primitives for discrete dynamic discrete choice models.

A model is a finite set of observed states, a finite choice set, a flow
utility for every (choice, state) pair, one row-stochastic transition
matrix per choice, and a discount factor.  Everything downstream
(Bellman operators, solvers, benchmarks) works off the `ModelSpec`
container defined here.

All arrays are float64 and are frozen after construction, so specs can
be shared freely across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

ROW_SUM_TOL = 1e-12
CCP_COLUMN_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ModelSpec:
    """
    Primitives of a stationary discrete choice model.

    Parameters
    ----------
    n_states : int
        Number of observed states, |X|.
    n_choices : int
        Number of choices, J.
    beta : float
        Discount factor, must lie in [0, 1) for a valid model.
    utility : numpy.ndarray
        Flow utilities u(j, x), shape (n_choices, n_states).
    transitions : numpy.ndarray
        Conditional transition matrices, shape
        (n_choices, n_states, n_states).  Entry [j, x, y] is the
        probability of moving to state y from state x under choice j.

    Notes
    -----
    The constructor only checks shapes.  Value-level requirements
    (row-stochastic transitions, finite utilities, beta in [0, 1)) are
    checked by `validate_model`, which reports violations as data
    rather than raising.

    Value functions are plain arrays: the integrated value function W
    is a vector of length n_states; the per-choice expected value
    stack EV is an array of shape (n_choices, n_states) whose C-order
    flattening gives the canonical block-by-choice layout
    (flat index of (j, x) is j * n_states + x).  Conditional choice
    probability matrices share the (n_choices, n_states) shape.
    """

    n_states: int
    n_choices: int
    beta: float
    utility: np.ndarray
    transitions: np.ndarray

    def __post_init__(self):
        if self.n_states <= 0 or self.n_choices <= 0:
            raise ValueError(
                f"n_states and n_choices must be positive, got "
                f"{self.n_states} and {self.n_choices}"
            )
        utility = np.ascontiguousarray(self.utility, dtype=np.float64)
        transitions = np.ascontiguousarray(self.transitions, dtype=np.float64)
        if utility.shape != (self.n_choices, self.n_states):
            raise ValueError(
                f"utility has shape {utility.shape}, expected "
                f"{(self.n_choices, self.n_states)}"
            )
        if transitions.shape != (self.n_choices, self.n_states, self.n_states):
            raise ValueError(
                f"transitions has shape {transitions.shape}, expected "
                f"{(self.n_choices, self.n_states, self.n_states)}"
            )
        utility.flags.writeable = False
        transitions.flags.writeable = False
        object.__setattr__(self, "utility", utility)
        object.__setattr__(self, "transitions", transitions)

    def to_json_dict(self) -> dict:
        """Serialize to the documented JSON layout (row-major matrices)."""
        return {
            "n_states": self.n_states,
            "n_choices": self.n_choices,
            "beta": self.beta,
            "utility": self.utility.tolist(),
            "transitions": [f.tolist() for f in self.transitions],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ModelSpec":
        """Build a spec from the documented JSON layout."""
        try:
            return cls(
                n_states=int(doc["n_states"]),
                n_choices=int(doc["n_choices"]),
                beta=float(doc["beta"]),
                utility=np.asarray(doc["utility"], dtype=np.float64),
                transitions=np.asarray(doc["transitions"], dtype=np.float64),
            )
        except KeyError as exc:
            raise ValueError(f"model document is missing field {exc}") from exc


def save_model(spec: ModelSpec, path: Union[str, Path]) -> None:
    """Write a model spec to a JSON file."""
    Path(path).write_text(json.dumps(spec.to_json_dict()))


def load_model(path: Union[str, Path]) -> ModelSpec:
    """Read a model spec from a JSON file."""
    return ModelSpec.from_json_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of `validate_model`: ok, or a list of violations."""

    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_model(spec: ModelSpec) -> ValidationReport:
    """
    Check the value-level invariants of a model spec.

    Violations are returned, not raised: an invalid model is data.
    Checks performed:

    - every transition row sums to 1 within ``ROW_SUM_TOL`` and all
      entries lie in [0, 1],
    - 0 <= beta < 1,
    - all utilities are finite.

    Choice matrices are labelled F(1)..F(J) in messages, matching the
    conventional 1-based naming; rows and columns are 0-based indices.
    """
    problems: list[str] = []
    if not (0.0 <= spec.beta < 1.0):
        problems.append(f"beta not in [0,1): got {spec.beta}")
    if not np.isfinite(spec.utility).all():
        bad = np.argwhere(~np.isfinite(spec.utility))
        for j, x in bad[:20]:
            problems.append(f"utility({j + 1},{x}) is not finite")
    for j in range(spec.n_choices):
        f = spec.transitions[j]
        if not np.isfinite(f).all():
            problems.append(f"F({j + 1}) contains non-finite entries")
            continue
        row_sums = f.sum(axis=1)
        bad_rows = np.nonzero(np.abs(row_sums - 1.0) > ROW_SUM_TOL)[0]
        for x in bad_rows[:20]:
            problems.append(f"row {x} of F({j + 1}) sums to {row_sums[x]:.12g}")
        out_of_range = np.nonzero((f < 0.0) | (f > 1.0))
        for x, y in zip(*(a[:20] for a in out_of_range)):
            problems.append(
                f"entry [{x},{y}] of F({j + 1}) is {f[x, y]:.12g}, outside [0,1]"
            )
    return ValidationReport(tuple(problems))


def logsumexp(values: np.ndarray, axis=None) -> Union[float, np.ndarray]:
    """
    Shift-stable log(sum(exp(values))).

    The maximum is subtracted before exponentiating, so inputs of any
    magnitude are safe and constant vectors come out exact:
    logsumexp([c, ..., c]) == c + log(len).

    Parameters
    ----------
    values : array_like
        Non-empty array of finite values.
    axis : int, optional
        Axis to reduce over; the whole array by default.

    Raises
    ------
    ValueError
        If the input is empty.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("logsumexp of an empty array is undefined")
    shift = values.max(axis=axis, keepdims=axis is not None)
    out = np.log(np.sum(np.exp(values - shift), axis=axis))
    if axis is None:
        return float(out + shift)
    return out + np.squeeze(shift, axis=axis)
