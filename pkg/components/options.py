"""European put under a lognormal terminal price: the game, its closed forms,
and the growth-optimal vs Black-Scholes comparison.

The log-return X is normal with mean -sigma^2 T/2 and variance sigma^2 T, and
the put pays a(x) = max(K - S e^{rT} e^x, 0).  The game is reduced to atoms by
Gauss-Legendre panels split at the payoff kink x* = log(K/S) - rT.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import norm

from utils.errors import GameSpecError
from utils.game_model import Rate, expectation, make_game
from utils.growth_solver import GrowthSolver

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PutModel:
    S: float
    K: float
    T: float
    sigma: float
    r: float

    def __post_init__(self):
        for name in ("S", "K", "T", "sigma", "r"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise GameSpecError(f"put model '{name}' must be positive, got {value!r}")

    @property
    def horizon_rate(self):
        """r*T, the rate whose exponential is the horizon growth target"""
        return Rate(self.r * self.T)

    @property
    def vol(self):
        return self.sigma * math.sqrt(self.T)

    def _d_terms(self):
        base = math.log(self.S / self.K)
        minus = (base + (self.r - self.sigma ** 2 / 2) * self.T) / self.vol
        plus = (base + (self.r + self.sigma ** 2 / 2) * self.T) / self.vol
        return minus, plus


@dataclass(frozen=True)
class QuadratureConfig:
    nodes_per_panel: int = 64
    half_width_sigmas: float = 10.0

    def __post_init__(self):
        if self.nodes_per_panel < 8:
            raise GameSpecError(
                f"quadrature 'nodes_per_panel' must be at least 8, got {self.nodes_per_panel!r}"
            )
        if not self.half_width_sigmas > 0:
            raise GameSpecError("quadrature 'half_width_sigmas' must be positive")


def normal_cdf(x):
    """Cumulative standard normal N(x)"""
    return norm.cdf(x)


def put_expectation(m):
    """E = K N(-d_minus) - S e^{rT} N(-d_plus)"""
    minus, plus = m._d_terms()
    return float(m.K * normal_cdf(-minus) - m.S * math.exp(m.r * m.T) * normal_cdf(-plus))


def black_scholes_put(m):
    """Black-Scholes put price K e^{-rT} N(-d_minus) - S N(-d_plus)"""
    minus, plus = m._d_terms()
    return float(m.K * math.exp(-m.r * m.T) * normal_cdf(-minus) - m.S * normal_cdf(-plus))


def _panel(lo, hi, nodes, weights):
    half = (hi - lo) / 2.0
    return lo + half * (nodes + 1.0), half * weights


def build_put_game(m, q=None):
    """Atoms of the put payoff from Gauss-Legendre panels on either side of the kink"""
    q = q or QuadratureConfig()
    mu = -(m.sigma ** 2) * m.T / 2.0
    width = q.half_width_sigmas * m.vol
    lo, hi = mu - width, mu + width
    kink = math.log(m.K / m.S) - m.r * m.T
    if kink <= lo:
        raise GameSpecError("put is worthless on the quadrature range: strike 'K' too low")

    nodes, gl_weights = leggauss(q.nodes_per_panel)
    growth = m.S * math.exp(m.r * m.T)

    xs_pos, w_pos = _panel(lo, min(kink, hi), nodes, gl_weights)
    pay_pos = np.maximum(m.K - growth * np.exp(xs_pos), 0.0)
    xs, ws, pays = [xs_pos], [w_pos], [pay_pos]
    if kink < hi:
        xs_zero, w_zero = _panel(kink, hi, nodes, gl_weights)
        # the payoff vanishes past the kink
        xs.append(xs_zero)
        ws.append(w_zero)
        pays.append(np.zeros_like(xs_zero))

    x = np.concatenate(xs)
    density = norm.pdf(x, loc=mu, scale=m.vol)
    weights = np.concatenate(ws) * density
    payoffs = np.concatenate(pays)

    logger.debug("put game: %d atoms, captured mass %.15f", x.size, weights.sum())
    return make_game(payoffs, weights / weights.sum(), label=f"put(S={m.S:g},K={m.K:g})")


@dataclass(frozen=True)
class OptionComparison:
    """Growth-optimal price block vs Black-Scholes price block"""

    expectation: float
    growth_target: float
    optimal_price: float
    optimal_proportion: float
    optimal_growth: float
    bs_price: float
    bs_proportion: float
    bs_growth: float

    @property
    def growth_optimal_cheaper(self):
        return self.optimal_price < self.bs_price

    @property
    def growth_optimal_faster(self):
        return self.optimal_growth > self.bs_growth

    def to_dict(self):
        return {
            "E": self.expectation,
            "growth_target": self.growth_target,
            "growth_optimal": {
                "u": self.optimal_price,
                "t": self.optimal_proportion,
                "growth": self.optimal_growth,
            },
            "black_scholes": {
                "u": self.bs_price,
                "t": self.bs_proportion,
                "growth": self.bs_growth,
            },
            "ordering": {
                "growth_optimal_cheaper": self.growth_optimal_cheaper,
                "growth_optimal_faster": self.growth_optimal_faster,
            },
        }


def demo_compare(m, solver=None, q=None):
    """Price the put growth-optimally at target e^{rT} and compare with Black-Scholes"""
    solver = solver or GrowthSolver()
    game = build_put_game(m, q)
    rate = m.horizon_rate

    outcome = solver.price(game, rate)
    bs = black_scholes_put(m)
    t_bs = solver.optimal_proportion(game, bs)
    comparison = OptionComparison(
        expectation=expectation(game),
        growth_target=rate.growth_target,
        optimal_price=outcome.price,
        optimal_proportion=outcome.proportion,
        optimal_growth=outcome.growth_at_solution,
        bs_price=bs,
        bs_proportion=t_bs,
        bs_growth=solver.growth(game, bs, t_bs),
    )
    logger.info(
        "growth-optimal u=%.6f (t=%.4f) vs Black-Scholes u=%.6f (t=%.4f)",
        comparison.optimal_price,
        comparison.optimal_proportion,
        comparison.bs_price,
        comparison.bs_proportion,
    )
    return comparison
