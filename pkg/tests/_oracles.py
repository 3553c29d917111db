"""
Independent reference implementations used as test oracles.

Everything here deliberately avoids the package's own vectorized
code paths: the spot-check oracles are plain Python loops over
math.exp/math.log, and the long-run fixed-point oracle reduces over
choices with numpy.logaddexp (a different numerical primitive than
the package's shift-exp-sum-log).
"""

import math

import numpy as np


def lse_list(values):
    """Shift-stable log-sum-exp of a plain Python list."""
    m = max(values)
    return m + math.log(sum(math.exp(v - m) for v in values))


def bellman_w_loops(spec, w):
    """Scalar-loop evaluation of the W operator."""
    n, nj, b = spec.n_states, spec.n_choices, spec.beta
    u, f = spec.utility, spec.transitions
    out = []
    for x in range(n):
        vals = []
        for j in range(nj):
            cont = sum(f[j][x][y] * w[y] for y in range(n))
            vals.append(u[j][x] + b * cont)
        out.append(lse_list(vals))
    return np.array(out)


def bellman_ev_loops(spec, ev):
    """Scalar-loop evaluation of the EV operator."""
    n, nj, b = spec.n_states, spec.n_choices, spec.beta
    u, f = spec.utility, spec.transitions
    m = [lse_list([u[j][x] + b * ev[j][x] for j in range(nj)]) for x in range(n)]
    out = np.empty((nj, n))
    for a in range(nj):
        for x in range(n):
            out[a, x] = sum(f[a][x][y] * m[y] for y in range(n))
    return out


def ccp_loops(spec, values):
    """Scalar-loop softmax over choices of given choice-specific values."""
    n, nj = spec.n_states, spec.n_choices
    out = np.empty((nj, n))
    for x in range(n):
        col = [values[j][x] for j in range(nj)]
        m = max(col)
        ex = [math.exp(v - m) for v in col]
        denom = sum(ex)
        for j in range(nj):
            out[j, x] = ex[j] / denom
    return out


def brute_force_w(spec, n_iters=100_000):
    """
    Fixed point of the W operator by long successive approximation,
    reducing over choices with numpy.logaddexp.
    """
    w = np.zeros(spec.n_states)
    for _ in range(n_iters):
        v = spec.utility + spec.beta * np.dot(spec.transitions, w)
        w = np.logaddexp.reduce(v, axis=0)
    return w


def brute_force_ev(spec, n_iters=100_000):
    """Fixed point of the EV operator by long successive approximation."""
    ev = np.zeros((spec.n_choices, spec.n_states))
    for _ in range(n_iters):
        v = spec.utility + spec.beta * ev
        m = np.logaddexp.reduce(v, axis=0)
        ev = np.dot(spec.transitions, m)
    return ev


def fd_jacobian(fn, x, h=1e-6):
    """Central finite-difference Jacobian of fn at x (flattened layout)."""
    x = np.asarray(x, dtype=np.float64)
    base = np.asarray(fn(x)).ravel()
    jac = np.empty((base.size, x.size))
    flat = x.ravel()
    for idx in range(flat.size):
        xp = flat.copy()
        xm = flat.copy()
        xp[idx] += h
        xm[idx] -= h
        fp = np.asarray(fn(xp.reshape(x.shape))).ravel()
        fm = np.asarray(fn(xm.reshape(x.shape))).ravel()
        jac[:, idx] = (fp - fm) / (2.0 * h)
    return jac


def random_model(rng, n_states, n_choices, beta=None):
    """A random valid model: Dirichlet transition rows, normal utilities."""
    from ddcsolve import ModelSpec

    if beta is None:
        beta = float(rng.uniform(0.5, 0.95))
    utility = rng.normal(size=(n_choices, n_states))
    transitions = rng.dirichlet(np.ones(n_states), size=(n_choices, n_states))
    return ModelSpec(
        n_states=n_states,
        n_choices=n_choices,
        beta=beta,
        utility=utility,
        transitions=transitions,
    )
