"""
Bellman operators, choice probabilities, and their derivatives.

Two equivalent fixed-point formulations of the same model are
supported:

- the integrated value function W, a vector over states, with operator
  ``bellman_w``: W(x) <- log sum_j exp(u(j,x) + beta * (F(j) W)(x));
- the per-choice expected value stack EV, shape (J, |X|), with
  operator ``bellman_ev``: EV_a <- F(a) m, where
  m(x) = log sum_j exp(u(j,x) + beta * EV_j(x)) is evaluated once and
  shared by all choice blocks.

Both operators are sup-norm contractions with modulus beta, and their
derivative matrices (``dbellman_w``, ``dbellman_ev``) have every row
summing to beta, which keeps the Newton systems I - T' nonsingular.

The maps ``ev_from_w`` / ``w_from_ev`` translate between formulations;
at a fixed point they are inverse to one another.
"""

from __future__ import annotations

import numpy as np

from .core import ModelSpec


def _check_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (spec.n_states,):
        raise ValueError(
            f"W iterate has shape {w.shape}, expected {(spec.n_states,)}"
        )
    return w


def _check_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev, dtype=np.float64)
    if ev.shape != (spec.n_choices, spec.n_states):
        raise ValueError(
            f"EV iterate has shape {ev.shape}, expected "
            f"{(spec.n_choices, spec.n_states)}"
        )
    return ev


def _lse_over_choices(v: np.ndarray) -> np.ndarray:
    # stable log-sum-exp down the choice axis of a (J, |X|) array
    shift = v.max(axis=0)
    return shift + np.log(np.exp(v - shift).sum(axis=0))


def _softmax_over_choices(v: np.ndarray) -> np.ndarray:
    e = np.exp(v - v.max(axis=0))
    return e / e.sum(axis=0)


def choice_values_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    """Choice-specific values v(j,x) = u(j,x) + beta * (F(j) W)(x)."""
    w = _check_w(spec, w)
    return spec.utility + spec.beta * (spec.transitions @ w)


def choice_values_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    """Choice-specific values v(j,x) = u(j,x) + beta * EV_j(x)."""
    ev = _check_ev(spec, ev)
    return spec.utility + spec.beta * ev


def bellman_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    """Apply the integrated-value Bellman operator to W."""
    return _lse_over_choices(choice_values_w(spec, w))


def bellman_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    """
    Apply the expected-value Bellman operator to an EV stack.

    The inner log-sum-exp vector m is computed once; block a of the
    output is F(a) m.  Sharing m across blocks is what keeps one EV
    iteration exactly as expensive as one W iteration.
    """
    m = _lse_over_choices(choice_values_ev(spec, ev))
    return spec.transitions @ m


def ccp_from_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    """
    Conditional choice probabilities P(a, x) implied by W.

    Softmax over choices of the choice-specific values, computed
    shift-stably per state; every column sums to 1.
    """
    return _softmax_over_choices(choice_values_w(spec, w))


def ccp_from_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    """Conditional choice probabilities P(a, x) implied by an EV stack."""
    return _softmax_over_choices(choice_values_ev(spec, ev))


def dbellman_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    """
    Derivative of ``bellman_w`` at W.

    Entry [x, y] is beta * sum_j P(j, x) F(j)[x, y]: beta times the
    choice-probability-weighted (controlled) transition matrix.  Shape
    (|X|, |X|); every row sums to beta.
    """
    p = ccp_from_w(spec, w)
    return spec.beta * np.einsum("jx,jxy->xy", p, spec.transitions)


def dbellman_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    """
    Derivative of ``bellman_ev`` at an EV stack.

    Block (a, j) equals beta * F(a) with column y scaled by P(j, y);
    stacking the blocks gives entry [(a,x), (j,y)] =
    beta * F(a)[x, y] * P(j, y).  Shape (J|X|, J|X|) in the canonical
    block-by-choice layout; every row sums to beta.
    """
    nj, nx = spec.n_choices, spec.n_states
    p = ccp_from_ev(spec, ev)
    scaled = spec.beta * p
    out = np.empty((nj, nx, nj, nx))
    for a in range(nj):
        for j in range(nj):
            np.multiply(spec.transitions[a], scaled[j][None, :], out=out[a, :, j, :])
    return out.reshape(nj * nx, nj * nx)


def ev_from_w(spec: ModelSpec, w: np.ndarray) -> np.ndarray:
    """EV stack implied by W: block j is F(j) W."""
    w = _check_w(spec, w)
    return spec.transitions @ w


def w_from_ev(spec: ModelSpec, ev: np.ndarray) -> np.ndarray:
    """W implied by an EV stack: W(x) = logsumexp_j(u(j,x) + beta EV_j(x))."""
    return _lse_over_choices(choice_values_ev(spec, ev))
