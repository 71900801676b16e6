"""Growth-optimal price u and reinvestment proportion t_u of a single game.

The price is the stake at which an investor reinvesting the optimal proportion
of capital each round attains limit growth exactly e^r.  Two regimes:

* full investment, when the discounted geometric mean f does not exceed the
  harmonic mean h: u = f and t_u = 1;
* interior, otherwise: u solves growth(u, t*(u)) = e^r where t*(u) is the root
  of the marginal in t.  The outer function u -> growth(u, t*(u)) is strictly
  decreasing on (h, E), so both solves are bracketed.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from utils.errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    GameSpecError,
    NoSolutionError,
)
from utils.game_model import expectation, geometric_price, harmonic_price

logger = logging.getLogger(__name__)

LOWER_BRACKET_FRACTION = 1e-8


class Regime(Enum):
    FULL_INVESTMENT = "FullInvestment"
    INTERIOR = "Interior"


@dataclass(frozen=True)
class SolverConfig:
    outer_tol: float = 1e-10
    inner_tol: float = 1e-12
    max_iter: int = 200
    t_ceiling_margin: float = 1e-9

    def __post_init__(self):
        for name in ("outer_tol", "inner_tol", "t_ceiling_margin"):
            value = getattr(self, name)
            if not value > 0:
                raise GameSpecError(f"solver '{name}' must be positive, got {value!r}")
        if self.max_iter < 10:
            raise GameSpecError(f"solver 'max_iter' must be at least 10, got {self.max_iter!r}")


@dataclass(frozen=True)
class PricingOutcome:
    """Price u, proportion t_u, the regime, and how well the equations hold"""

    price: float
    proportion: float
    regime: Regime
    growth_at_solution: float
    growth_residual: float
    marginal_residual: float
    kappa: Optional[float] = None

    def to_dict(self):
        out = {
            "u": self.price,
            "t": self.proportion,
            "regime": self.regime.value,
            "growth": self.growth_at_solution,
            "residuals": {"growth": self.growth_residual, "marginal": self.marginal_residual},
        }
        if self.kappa is not None:
            out["kappa"] = self.kappa
        return out


class GrowthSolver:
    def __init__(self, config=None):
        self.config = config or SolverConfig()

    # ---------- growth function and its t-derivative ----------

    def log_growth(self, g, u, t):
        """Expected log growth: sum weight * log(payoff*t/u - t + 1)"""
        if u <= 0:
            raise DomainError(f"price u must be positive, got {u!r}")
        args = 1.0 + t * (g.payoffs / u - 1.0)
        if np.any(args <= 0):
            raise DomainError(f"growth undefined at u={u:.6g}, t={t:.6g}: nonpositive wealth factor")
        return float(np.dot(g.weights, np.log(args)))

    def growth(self, g, u, t):
        """G_u(t) = exp(sum weight * log(payoff*t/u - t + 1))"""
        return math.exp(self.log_growth(g, u, t))

    def marginal(self, g, u, t):
        """d/dt of log growth: sum weight * (payoff - u) / (payoff*t - u*t + u)"""
        denom = g.payoffs * t - u * t + u
        if np.any(denom <= 0):
            # only reachable at t = 1 with a zero-payoff atom
            return -math.inf
        return float(np.dot(g.weights, (g.payoffs - u) / denom))

    def t_ceiling(self, g):
        return 1.0 - self.config.t_ceiling_margin if g.has_zero_payoff else 1.0

    # ---------- inner solve ----------

    def optimal_proportion(self, g, u):
        """t* in (0, 1) maximizing growth at price u, for h < u < E"""
        h = harmonic_price(g)
        e = expectation(g)
        if not h < u < e:
            raise BracketError(f"price u={u:.12g} outside interior bracket ({h:.12g}, {e:.12g})")
        return self._argmax_t(g, u)

    def _argmax_t(self, g, u):
        cfg = self.config
        if self.marginal(g, u, 0.0) <= 0:
            return 0.0
        ceiling = self.t_ceiling(g)
        if self.marginal(g, u, ceiling) >= 0:
            logger.debug("optimal proportion clamped at t=%.12g for u=%.6g", ceiling, u)
            return ceiling
        try:
            return brentq(
                lambda t: self.marginal(g, u, t),
                0.0,
                ceiling,
                xtol=cfg.inner_tol,
                maxiter=cfg.max_iter,
            )
        except RuntimeError as e:
            raise ConvergenceError(f"inner solve at u={u:.6g}: {e}") from e

    # ---------- outer solve ----------

    def outer_growth(self, g, u):
        """Lambda(u) = growth(u, t*(u)), strictly decreasing in u"""
        return self.growth(g, u, self._argmax_t(g, u))

    def price(self, g, rate):
        """Growth-optimal price and proportion of a game"""
        e = expectation(g)
        if not e > 0:
            raise GameSpecError("game must have positive expectation")
        f = geometric_price(g, rate)
        h = harmonic_price(g)

        if not g.has_zero_payoff and f <= h:
            logger.info("full investment regime: f=%.12g <= h=%.12g", f, h)
            grown = self.growth(g, f, 1.0)
            return PricingOutcome(
                price=f,
                proportion=1.0,
                regime=Regime.FULL_INVESTMENT,
                growth_at_solution=grown,
                growth_residual=grown - rate.growth_target,
                marginal_residual=self.marginal(g, f, 1.0),
            )
        return self.solve_interior(g, rate)

    def solve_interior(self, g, rate):
        """Solve the interior system growth = e^r, marginal = 0 regardless of regime"""
        cfg = self.config
        target = rate.growth_target
        e = expectation(g)
        lo = max(harmonic_price(g), LOWER_BRACKET_FRACTION * e)

        gap_lo = self.outer_growth(g, lo) / target - 1.0
        if gap_lo <= 0:
            if gap_lo >= -cfg.outer_tol:
                # f = h: the bracket end solves both equations with t = 1
                u_star = lo
            else:
                raise NoSolutionError(
                    f"target growth {target:.12g} unattainable: growth at lower bracket "
                    f"u={lo:.12g} is only {target * (1.0 + gap_lo):.12g}"
                )
        else:
            try:
                u_star = brentq(
                    lambda u: self.outer_growth(g, u) / target - 1.0,
                    lo,
                    e,
                    xtol=1e-3 * cfg.outer_tol * e,
                    maxiter=cfg.max_iter,
                )
            except RuntimeError as err:
                raise ConvergenceError(f"outer solve: {err}") from err

        t_star = self._argmax_t(g, u_star)
        grown = self.growth(g, u_star, t_star)
        residual = grown - target
        if abs(residual) > cfg.outer_tol * target:
            raise ConvergenceError(
                f"growth residual {residual:.3g} exceeds tolerance at u={u_star:.12g}"
            )
        logger.debug("interior solution u=%.12g t=%.12g", u_star, t_star)
        return PricingOutcome(
            price=u_star,
            proportion=t_star,
            regime=Regime.INTERIOR,
            growth_at_solution=grown,
            growth_residual=residual,
            marginal_residual=self.marginal(g, u_star, t_star),
        )

    # ---------- two-outcome closed form ----------

    def two_point_price(self, a, b, rate):
        """Closed-form price of the game paying a or b with probability 1/2"""
        a, b = float(a), float(b)
        if not (a > 0 and b > 0):
            raise GameSpecError("two-point payoffs 'a' and 'b' must be positive")
        target = rate.growth_target
        root_ab = math.sqrt(a * b)
        mean = (a + b) / 2.0

        if mean / root_ab <= target:
            u = root_ab / target
            return PricingOutcome(
                price=u,
                proportion=1.0,
                regime=Regime.FULL_INVESTMENT,
                growth_at_solution=root_ab / u,
                growth_residual=root_ab / u - target,
                marginal_residual=1.0 - u * (a + b) / (2.0 * a * b),
            )

        if a < b:
            a, b = b, a
        kappa = (1.0 - math.sqrt(1.0 - math.exp(-2.0 * rate.r))) / 2.0
        u = kappa * a + (1.0 - kappa) * b
        t = u * (mean - u) / ((a - u) * (u - b))
        wa = a * t - u * t + u
        wb = b * t - u * t + u
        grown = math.sqrt(wa * wb) / u
        return PricingOutcome(
            price=u,
            proportion=t,
            regime=Regime.INTERIOR,
            growth_at_solution=grown,
            growth_residual=grown - target,
            marginal_residual=(a - u) / (2.0 * wa) + (b - u) / (2.0 * wb),
            kappa=kappa,
        )
