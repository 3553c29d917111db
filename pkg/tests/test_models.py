import numpy as np
import pytest

from ddcsolve import (
    BusModelConfig,
    SolveOptions,
    StorableGoodsConfig,
    build_bus_model,
    build_storable_goods_model,
    bus_ev2_diagnostics,
    is_bus_like,
    poly_solve,
    validate_model,
)
from ddcsolve.models import load_bus_config, load_storable_config


P3 = (0.36, 0.48, 0.16)


class TestBusConstruction:
    def test_five_state_keep_band(self):
        spec = build_bus_model(BusModelConfig(n_states=5, jump_probs=P3))
        p1, p2, p3 = P3
        expected = np.array(
            [
                [p1, p2, p3, 0, 0],
                [0, p1, p2, p3, 0],
                [0, 0, p1, p2, p3],
                [0, 0, 0, p1, p2 + p3],
                [0, 0, 0, 0, 1.0],
            ]
        )
        np.testing.assert_allclose(spec.transitions[0], expected, atol=1e-15)

    def test_corrected_replace_rows(self):
        spec = build_bus_model(BusModelConfig(n_states=5, jump_probs=P3))
        expected_row = np.array([*P3, 0.0, 0.0])
        for x in range(5):
            np.testing.assert_allclose(spec.transitions[1, x], expected_row, atol=1e-15)

    def test_faulty_replace_rows(self):
        spec = build_bus_model(
            BusModelConfig(n_states=5, variant="rust_original_faulty")
        )
        expected = np.zeros(5)
        expected[0] = 1.0
        for x in range(5):
            np.testing.assert_array_equal(spec.transitions[1, x], expected)

    def test_degenerate_jump_is_identity_with_absorbing_tail(self):
        spec = build_bus_model(BusModelConfig(n_states=4, jump_probs=(1.0,)))
        np.testing.assert_array_equal(spec.transitions[0], np.eye(4))

    def test_utilities(self):
        cfg = BusModelConfig(n_states=4, rc=7.0, theta_cost=2.0)
        spec = build_bus_model(cfg)
        np.testing.assert_allclose(
            spec.utility[0], [-0.0, -0.5, -1.0, -1.5], atol=1e-15
        )
        np.testing.assert_allclose(spec.utility[1], -7.0, atol=1e-15)

    def test_boundary_mass_conserved(self):
        for n in (5, 90, 175):
            spec = build_bus_model(BusModelConfig(n_states=n))
            np.testing.assert_allclose(
                spec.transitions.sum(axis=2), 1.0, atol=1e-14
            )

    def test_validates(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            m = int(rng.integers(1, 6))
            probs = rng.dirichlet(np.ones(m))
            cfg = BusModelConfig(
                n_states=int(rng.integers(m + 1, 40)),
                jump_probs=tuple(probs),
                rc=float(rng.uniform(1, 20)),
                theta_cost=float(rng.uniform(0.5, 5)),
                beta=float(rng.uniform(0.0, 0.9999)),
                variant=rng.choice(["corrected", "rust_original_faulty"]),
            )
            assert validate_model(build_bus_model(cfg)).ok

    def test_bad_configs_raise(self):
        with pytest.raises(ValueError, match="sum to 1"):
            build_bus_model(BusModelConfig(jump_probs=(0.5, 0.6)))
        with pytest.raises(ValueError, match="fewer jump bins"):
            build_bus_model(BusModelConfig(n_states=2, jump_probs=(0.5, 0.3, 0.2)))
        with pytest.raises(ValueError, match="variant"):
            build_bus_model(BusModelConfig(variant="fixed"))

    def test_is_bus_like(self):
        assert is_bus_like(build_bus_model(BusModelConfig(n_states=8)))
        assert not is_bus_like(
            build_bus_model(BusModelConfig(n_states=8, variant="rust_original_faulty"))
        )
        assert not is_bus_like(build_storable_goods_model(StorableGoodsConfig()))

    def test_config_json_round_trip(self):
        cfg = BusModelConfig(n_states=17, variant="rust_original_faulty")
        doc = cfg.to_json_dict()
        assert doc["variant"] == "rust_original_faulty"
        assert set(doc) == {
            "n_states", "jump_probs", "rc", "theta_cost", "beta", "variant",
        }
        assert load_bus_config(doc) == cfg


class TestStorableConstruction:
    def test_smallest_grid_is_twelve_states(self):
        spec = build_storable_goods_model(StorableGoodsConfig(inventory_levels=6))
        assert spec.n_states == 12
        assert spec.n_choices == 3

    def test_empty_inventory_no_purchase_corner(self):
        cfg = StorableGoodsConfig(inventory_levels=6, holding_cost=0.0)
        spec = build_storable_goods_model(cfg)
        # state (inventory 0, price 0), buy 0: nothing consumed, nothing paid
        assert spec.utility[0, 0] == 0.0
        # and inventory stays empty: transition row targets inventory 0
        row = spec.transitions[0, 0]
        assert row[: cfg.price_levels].sum() == pytest.approx(1.0)

    def test_rows_have_price_levels_nonzeros(self):
        cfg = StorableGoodsConfig(inventory_levels=5)
        spec = build_storable_goods_model(cfg)
        nonzeros = (spec.transitions != 0.0).sum(axis=2)
        assert (nonzeros == cfg.price_levels).all()
        np.testing.assert_allclose(spec.transitions.sum(axis=2), 1.0, atol=1e-14)

    def test_consumption_and_price_enter_utility(self):
        cfg = StorableGoodsConfig(inventory_levels=3, holding_cost=0.1)
        spec = build_storable_goods_model(cfg)
        # state (inventory 0, price r), buy 1: consume, pay prices[r], end empty
        for r, price in enumerate(cfg.prices):
            s = 0 * cfg.price_levels + r
            assert spec.utility[1, s] == pytest.approx(
                cfg.consumption_utility - price
            )
        # buy 2 from empty: consume one, hold one
        s = 0
        assert spec.utility[2, s] == pytest.approx(
            cfg.consumption_utility - 2 * cfg.prices[0] - cfg.holding_cost
        )

    def test_inventory_clamps_at_capacity(self):
        cfg = StorableGoodsConfig(inventory_levels=3)
        spec = build_storable_goods_model(cfg)
        # top inventory, buy 2: next inventory clamps to the top level
        s = 2 * cfg.price_levels
        target = spec.transitions[2, s].nonzero()[0]
        assert (target // cfg.price_levels == 2).all()

    def test_validates(self):
        rng = np.random.default_rng(1)
        for _ in range(15):
            n_pr = int(rng.integers(1, 4))
            ptrans = rng.dirichlet(np.ones(n_pr), size=n_pr)
            cfg = StorableGoodsConfig(
                inventory_levels=int(rng.integers(2, 30)),
                price_levels=n_pr,
                price_transition=tuple(tuple(row) for row in ptrans),
                consumption_utility=float(rng.uniform(1, 6)),
                holding_cost=float(rng.uniform(0, 0.5)),
                prices=tuple(rng.uniform(0.2, 3.0, size=n_pr)),
                beta=float(rng.uniform(0.0, 0.999)),
            )
            assert validate_model(build_storable_goods_model(cfg)).ok

    def test_bad_configs_raise(self):
        with pytest.raises(ValueError, match="row-stochastic"):
            build_storable_goods_model(
                StorableGoodsConfig(price_transition=((0.9, 0.2), (0.5, 0.5)))
            )
        with pytest.raises(ValueError, match="prices"):
            build_storable_goods_model(StorableGoodsConfig(prices=(1.0,)))

    def test_config_json_round_trip(self):
        cfg = StorableGoodsConfig(inventory_levels=9, beta=0.95)
        assert load_storable_config(cfg.to_json_dict()) == cfg


@pytest.fixture(scope="module")
def solved():
    out = {}
    for variant in ("corrected", "rust_original_faulty"):
        cfg = BusModelConfig(n_states=40, beta=0.95, variant=variant)
        spec = build_bus_model(cfg)
        res = poly_solve(spec, "ev", SolveOptions())
        assert res.converged
        out[variant] = (spec, res.solution)
    return out


class TestBusDiagnostics:
    def test_corrected_identity_holds(self, solved):
        spec, ev = solved["corrected"]
        diag = bus_ev2_diagnostics(spec, ev)
        assert diag.ev2_constant
        assert diag.identity_holds
        assert abs(diag.gap) <= 1e-9

    def test_faulty_identity_fails_with_positive_gap(self, solved):
        spec, ev = solved["rust_original_faulty"]
        diag = bus_ev2_diagnostics(spec, ev)
        assert diag.ev2_constant  # replace block is still constant
        assert not diag.identity_holds
        assert diag.gap > 0  # keep value at 0 sits below the replace value

    def test_corrected_w_non_increasing(self, solved):
        spec, _ = solved["corrected"]
        res = poly_solve(spec, "w", SolveOptions())
        assert res.converged
        assert (np.diff(res.solution) <= 1e-12).all()

    def test_rejects_non_binary_model(self):
        spec = build_storable_goods_model(StorableGoodsConfig())
        with pytest.raises(ValueError, match="binary"):
            bus_ev2_diagnostics(spec, np.zeros((3, spec.n_states)))

    def test_json_dict_fields(self, solved):
        spec, ev = solved["corrected"]
        doc = bus_ev2_diagnostics(spec, ev).to_json_dict()
        assert set(doc) == {"ev2_constant", "identity_holds", "gap"}
