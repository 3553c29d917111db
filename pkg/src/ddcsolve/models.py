"""
Benchmark model families.

Two families drive the test and benchmark suites:

- A binary-choice machine replacement model on an odometer-style grid
  (keep vs. replace).  The keep transition is a banded forward-jump
  matrix; the replacement transition comes in two variants that differ
  in whether the post-replacement odometer distribution matches the
  first keep row ("corrected") or dumps all mass on state 0
  ("rust_original_faulty").  Only the corrected variant supports the
  dimensionality-reduction identity EV_2(x) = EV_1(0); the faulty one
  is kept deliberately to demonstrate how the identity breaks.

- A stylized storable-goods demand model with three purchase
  quantities on an inventory-by-price grid.  This is a from-scratch
  canonical design (one unit consumed per period when available,
  deterministic inventory dynamics, exogenous two-state price process)
  and claims no fidelity beyond its choice count and state-space
  sizes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ModelSpec
from .operators import bellman_ev


BUS_VARIANTS = ("corrected", "rust_original_faulty")


@dataclass(frozen=True)
class BusModelConfig:
    """
    Configuration of the machine replacement model.

    jump_probs is the per-period distribution of odometer-bin
    advances under "keep" (advance by 0, 1, ..., m-1 bins); rc is the
    replacement cost and theta_cost the slope of the linear
    maintenance cost c(x) = x / n_states.
    """

    n_states: int = 90
    jump_probs: tuple = (0.36, 0.48, 0.16)
    rc: float = 10.0
    theta_cost: float = 2.5
    beta: float = 0.9999
    variant: str = "corrected"

    def to_json_dict(self) -> dict:
        return {
            "n_states": self.n_states,
            "jump_probs": list(self.jump_probs),
            "rc": self.rc,
            "theta_cost": self.theta_cost,
            "beta": self.beta,
            "variant": self.variant,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "BusModelConfig":
        return cls(
            n_states=int(doc["n_states"]),
            jump_probs=tuple(float(p) for p in doc["jump_probs"]),
            rc=float(doc["rc"]),
            theta_cost=float(doc["theta_cost"]),
            beta=float(doc["beta"]),
            variant=str(doc["variant"]),
        )


def _default_price_transition() -> tuple:
    return ((0.9, 0.1), (0.5, 0.5))


@dataclass(frozen=True)
class StorableGoodsConfig:
    """
    Configuration of the storable-goods demand model.

    States are (inventory, price regime) pairs enumerated
    inventory-major, so |X| = inventory_levels * price_levels.  The
    agent buys 0, 1 or 2 units each period and consumes one unit when
    stock (including the purchase) is available.
    """

    inventory_levels: int = 6
    price_levels: int = 2
    price_transition: tuple = field(default_factory=_default_price_transition)
    consumption_utility: float = 4.0
    holding_cost: float = 0.05
    prices: tuple = (1.0, 0.6)
    beta: float = 0.99

    def to_json_dict(self) -> dict:
        return {
            "inventory_levels": self.inventory_levels,
            "price_levels": self.price_levels,
            "price_transition": [list(row) for row in self.price_transition],
            "consumption_utility": self.consumption_utility,
            "holding_cost": self.holding_cost,
            "prices": list(self.prices),
            "beta": self.beta,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "StorableGoodsConfig":
        return cls(
            inventory_levels=int(doc["inventory_levels"]),
            price_levels=int(doc["price_levels"]),
            price_transition=tuple(
                tuple(float(p) for p in row) for row in doc["price_transition"]
            ),
            consumption_utility=float(doc["consumption_utility"]),
            holding_cost=float(doc["holding_cost"]),
            prices=tuple(float(p) for p in doc["prices"]),
            beta=float(doc["beta"]),
        )


def build_bus_model(cfg: BusModelConfig) -> ModelSpec:
    """
    Construct the binary replacement model.

    Choice 1 (index 0) is "keep": row x of F(1) puts jump_probs[i] on
    state x + i, with any mass that would overflow the grid
    accumulated in the last column, so the final row is absorbing.
    Choice 2 (index 1) is "replace": under the corrected variant every
    row of F(2) equals (p_1, ..., p_m, 0, ..., 0), the same
    distribution as keep from a fresh machine; under the
    rust_original_faulty variant every row puts all mass on state 0.

    Utilities: u(keep, x) = -theta_cost * c(x) with c(x) = x/n_states;
    u(replace, x) = -rc - theta_cost * c(0).
    """
    p = np.asarray(cfg.jump_probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("jump_probs must be a non-empty vector")
    if (p < 0).any() or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError(
            f"jump_probs must be nonnegative and sum to 1, got {cfg.jump_probs}"
        )
    if p.size >= cfg.n_states:
        raise ValueError(
            f"need fewer jump bins than states: m={p.size}, "
            f"n_states={cfg.n_states}"
        )
    if cfg.variant not in BUS_VARIANTS:
        raise ValueError(
            f"unknown variant {cfg.variant!r}, expected one of {BUS_VARIANTS}"
        )
    if cfg.rc <= 0 or cfg.theta_cost <= 0:
        raise ValueError("rc and theta_cost must be positive")

    n = cfg.n_states
    keep = np.zeros((n, n))
    for x in range(n):
        for i, pi in enumerate(p):
            keep[x, min(x + i, n - 1)] += pi

    replace = np.zeros((n, n))
    if cfg.variant == "corrected":
        replace[:, : p.size] = p
    else:
        replace[:, 0] = 1.0

    cost = cfg.theta_cost * np.arange(n) / n
    utility = np.vstack([-cost, np.full(n, -cfg.rc - cost[0])])
    return ModelSpec(
        n_states=n,
        n_choices=2,
        beta=cfg.beta,
        utility=utility,
        transitions=np.stack([keep, replace]),
    )


def build_storable_goods_model(cfg: StorableGoodsConfig) -> ModelSpec:
    """
    Construct the storable-goods model (J = 3: buy 0, 1 or 2 units).

    Next inventory is clamp(i + buy - 1, 0, inventory_levels - 1);
    consumption happens whenever i + buy >= 1.  Flow utility is
    consumption_utility on consumption, minus prices[r] per unit
    bought, minus holding_cost per unit carried into next period.
    Each transition row is the deterministic inventory move composed
    with the exogenous price process, so it has exactly price_levels
    nonzeros.
    """
    if cfg.inventory_levels <= 0 or cfg.price_levels <= 0:
        raise ValueError("inventory_levels and price_levels must be positive")
    ptrans = np.asarray(cfg.price_transition, dtype=np.float64)
    if ptrans.shape != (cfg.price_levels, cfg.price_levels):
        raise ValueError(
            f"price_transition has shape {ptrans.shape}, expected "
            f"{(cfg.price_levels, cfg.price_levels)}"
        )
    if (ptrans < 0).any() or np.abs(ptrans.sum(axis=1) - 1.0).max() > 1e-12:
        raise ValueError("price_transition must be row-stochastic")
    prices = np.asarray(cfg.prices, dtype=np.float64)
    if prices.shape != (cfg.price_levels,):
        raise ValueError(
            f"prices must have one entry per price level, got {prices.shape}"
        )

    n_inv, n_pr = cfg.inventory_levels, cfg.price_levels
    n = n_inv * n_pr
    n_buy = 3
    utility = np.zeros((n_buy, n))
    transitions = np.zeros((n_buy, n, n))
    for buy in range(n_buy):
        for i in range(n_inv):
            consumed = (i + buy) >= 1
            nxt = min(max(i + buy - 1, 0), n_inv - 1)
            for r in range(n_pr):
                s = i * n_pr + r
                utility[buy, s] = (
                    cfg.consumption_utility * consumed
                    - prices[r] * buy
                    - cfg.holding_cost * nxt
                )
                transitions[buy, s, nxt * n_pr : (nxt + 1) * n_pr] = ptrans[r]
    return ModelSpec(
        n_states=n,
        n_choices=n_buy,
        beta=cfg.beta,
        utility=utility,
        transitions=transitions,
    )


def is_bus_like(spec: ModelSpec) -> bool:
    """
    True when the spec has the replacement structure the reduced
    solver relies on: binary choice and a second transition matrix
    whose rows are all identical to row 0 of the first (replacement
    restarts the process exactly like a fresh keep).
    """
    if spec.n_choices != 2:
        return False
    f_keep, f_replace = spec.transitions
    if np.abs(f_replace - f_replace[0]).max() > 1e-12:
        return False
    return np.abs(f_replace[0] - f_keep[0]).max() <= 1e-12


@dataclass(frozen=True)
class BusEvDiagnostics:
    """
    Replacement-block diagnostics of a solved EV stack.

    ev2_constant
        Whether the replacement block EV_2 is constant across states
        (it is, for both variants, since all replacement rows share
        one distribution).
    identity_holds
        Whether max_x |EV_2(x) - EV_1(0)| <= 1e-9, the identity the
        reduced Newton solver needs.
    gap
        Signed difference EV_2(0) - EV_1(0); positive for the faulty
        variant whenever the keep distribution can actually advance
        (p_1 < 1) and maintenance costs make values fall with the
        state.
    """

    ev2_constant: bool
    identity_holds: bool
    gap: float

    def to_json_dict(self) -> dict:
        return {
            "ev2_constant": self.ev2_constant,
            "identity_holds": self.identity_holds,
            "gap": self.gap,
        }


def bus_ev2_diagnostics(
    spec: ModelSpec,
    solved_ev: np.ndarray,
    constant_tol: float = 1e-10,
    identity_tol: float = 1e-9,
) -> BusEvDiagnostics:
    """
    Inspect a converged EV solution of a binary replacement model.

    Parameters
    ----------
    spec : ModelSpec
        A binary-choice model (keep/replace).
    solved_ev : numpy.ndarray
        Converged EV stack, shape (2, n_states).

    Raises
    ------
    ValueError
        If the spec is not binary-choice or the EV stack has the
        wrong shape.
    """
    if spec.n_choices != 2:
        raise ValueError(
            f"replacement diagnostics need a binary model, got J={spec.n_choices}"
        )
    ev = np.asarray(solved_ev, dtype=np.float64)
    if ev.shape != (2, spec.n_states):
        raise ValueError(
            f"EV stack has shape {ev.shape}, expected {(2, spec.n_states)}"
        )
    residual = np.abs(ev - bellman_ev(spec, ev)).max()
    if not np.isfinite(residual):
        raise ValueError("EV stack is not finite")
    ev2_constant = float(np.ptp(ev[1])) <= constant_tol
    identity_gap = float(np.abs(ev[1] - ev[0, 0]).max())
    return BusEvDiagnostics(
        ev2_constant=ev2_constant,
        identity_holds=identity_gap <= identity_tol,
        gap=float(ev[1, 0] - ev[0, 0]),
    )


def load_bus_config(path_or_doc) -> BusModelConfig:
    """Load a bus config from a JSON file path or parsed document."""
    if isinstance(path_or_doc, dict):
        return BusModelConfig.from_json_dict(path_or_doc)
    return BusModelConfig.from_json_dict(json.loads(Path(path_or_doc).read_text()))


def load_storable_config(path_or_doc) -> StorableGoodsConfig:
    """Load a storable-goods config from a JSON file path or document."""
    if isinstance(path_or_doc, dict):
        return StorableGoodsConfig.from_json_dict(path_or_doc)
    return StorableGoodsConfig.from_json_dict(
        json.loads(Path(path_or_doc).read_text())
    )
