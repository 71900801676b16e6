import math

import numpy as np
import pytest

from components.options import (
    PutModel,
    QuadratureConfig,
    black_scholes_put,
    build_put_game,
    demo_compare,
    normal_cdf,
    put_expectation,
)
from utils.errors import GameSpecError
from utils.game_model import expectation, harmonic_price


@pytest.fixture(scope="module")
def comparison(put_model):
    return demo_compare(put_model)


class TestModels:
    @pytest.mark.parametrize("field", ["S", "K", "T", "sigma", "r"])
    def test_rejects_nonpositive(self, field):
        values = dict(S=90, K=120, T=2, sigma=0.1, r=0.04)
        values[field] = 0.0
        with pytest.raises(GameSpecError, match=field):
            PutModel(**values)

    def test_quadrature_needs_enough_nodes(self):
        with pytest.raises(GameSpecError, match="nodes_per_panel"):
            QuadratureConfig(nodes_per_panel=4)


class TestNormalCdf:
    def test_symmetry(self):
        xs = np.linspace(-8, 8, 161)
        assert np.all(np.abs(normal_cdf(xs) + normal_cdf(-xs) - 1.0) <= 1e-14)

    def test_monotone(self):
        values = normal_cdf(np.linspace(-6, 6, 241))
        assert np.all(np.diff(values) > 0)


# ============================================================
# Closed forms
# ============================================================

class TestClosedForms:
    def test_reference_expectation(self, put_model):
        assert put_expectation(put_model) == pytest.approx(22.9848, abs=1e-3)

    def test_reference_black_scholes(self, put_model):
        assert black_scholes_put(put_model) == pytest.approx(21.2176, abs=1e-3)

    def test_worthless_put(self):
        assert put_expectation(PutModel(S=90, K=1e-6, T=2, sigma=0.1, r=0.04)) < 1e-10

    def test_deterministic_terminal_price(self):
        out_of_money = PutModel(S=100, K=90, T=2, sigma=1e-8, r=0.04)
        assert put_expectation(out_of_money) == pytest.approx(0.0, abs=1e-12)
        in_money = PutModel(S=90, K=120, T=2, sigma=1e-8, r=0.04)
        assert put_expectation(in_money) == pytest.approx(120 - 90 * math.exp(0.08), rel=1e-12)
        assert black_scholes_put(in_money) == pytest.approx(120 * math.exp(-0.08) - 90, rel=1e-12)

    def test_discount_identity(self):
        rng = np.random.default_rng(66)
        checked = 0
        for _ in range(200):
            model = PutModel(
                S=rng.uniform(50, 150),
                K=rng.uniform(50, 150),
                T=rng.uniform(0.25, 3),
                sigma=rng.uniform(0.1, 0.5),
                r=rng.uniform(0.01, 0.1),
            )
            e = put_expectation(model)
            if e < 1.0:
                continue
            assert black_scholes_put(model) * math.exp(model.r * model.T) == pytest.approx(e, rel=1e-12)
            checked += 1
        assert checked > 50


# ============================================================
# Quadrature game
# ============================================================

class TestPutGame:
    def test_expectation_matches_closed_form(self, put_game, put_model):
        assert expectation(put_game) == pytest.approx(22.9848, abs=2e-3)
        assert expectation(put_game) == pytest.approx(put_expectation(put_model), abs=2e-3)

    def test_fine_quadrature(self, put_model):
        game = build_put_game(put_model, QuadratureConfig(nodes_per_panel=256))
        assert expectation(game) == pytest.approx(put_expectation(put_model), abs=1e-5)

    def test_self_convergence(self, put_model):
        coarse = expectation(build_put_game(put_model, QuadratureConfig(nodes_per_panel=64)))
        fine = expectation(build_put_game(put_model, QuadratureConfig(nodes_per_panel=128)))
        assert abs(fine - coarse) <= 1e-6 * fine

    def test_harmonic_price_vanishes(self, put_game):
        assert harmonic_price(put_game) == 0.0

    def test_kink_placement(self, put_game):
        nodes = QuadratureConfig().nodes_per_panel
        assert put_game.size == 2 * nodes
        assert np.all(put_game.payoffs[:nodes] > 0)
        assert np.all(put_game.payoffs[nodes:] == 0)
        assert abs(put_game.weights.sum() - 1.0) <= 1e-12

    def test_worthless_range_rejected(self):
        with pytest.raises(GameSpecError, match="K"):
            build_put_game(PutModel(S=90, K=1, T=2, sigma=0.1, r=0.04))


class TestDemoCompare:
    def test_growth_optimal_block(self, comparison):
        assert comparison.optimal_price == pytest.approx(17.8157, abs=2e-3)
        assert comparison.optimal_proportion == pytest.approx(0.5434, abs=2e-3)
        assert comparison.optimal_growth == pytest.approx(math.exp(0.08), rel=1e-9)
        assert comparison.growth_target == pytest.approx(1.0833, abs=1e-4)

    def test_black_scholes_block(self, comparison):
        assert comparison.bs_price == pytest.approx(21.2176, abs=1e-3)
        assert comparison.bs_proportion == pytest.approx(0.2278, abs=2e-3)
        assert comparison.bs_growth == pytest.approx(1.0096, abs=1e-3)

    def test_ordering(self, comparison):
        assert comparison.growth_optimal_cheaper
        assert comparison.growth_optimal_faster
        doc = comparison.to_dict()
        assert doc["ordering"] == {"growth_optimal_cheaper": True, "growth_optimal_faster": True}
