"""Least-squares prices of a portfolio of games.

For adjustments t in the box [0, 1]^n the functional

    L(t) = max_{p in simplex} u(sum p_i A_i) / sum p_i (u_i + t_i d_i),  d_i = E_i/e^r - u_i

is at most 1 on the closed convex set T.  The minimum-norm point x of T is found by
cutting planes: every maximizer p* of the ratio gives a linear constraint valid
for all of T, and the min-norm point of the accumulated constraints is a small
dense quadratic program.  At the answer L(x) = 1, and the least-squares prices
are u_i + x_i d_i.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from utils.errors import (
    ConvergenceError,
    GameSpecError,
    InfeasibleBoxError,
    InvariantViolation,
)
from utils.game_model import GameLoader, Rate, combine, expectation, same_distribution
from utils.growth_solver import GrowthSolver

logger = logging.getLogger(__name__)

GAP_TOL = 1e-9
SIMPLEX_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CuttingPlaneConfig:
    membership_tol: float = 1e-8
    stop_tol: float = 1e-6
    max_cuts: int = 100
    grid_subdivisions: Optional[int] = None
    refine_iterations: int = 200

    def __post_init__(self):
        if not (self.membership_tol > 0 and self.stop_tol > 0):
            raise GameSpecError("cutting-plane tolerances must be positive")
        if self.max_cuts < 1:
            raise GameSpecError("cutting-plane 'max_cuts' must be at least 1")

    def subdivisions(self, n):
        if self.grid_subdivisions is not None:
            return self.grid_subdivisions
        if n <= 3:
            return 64
        if n <= 6:
            return 16
        return 8


@dataclass(frozen=True, eq=False)
class Portfolio:
    """n games on one distribution with their prices u_i and gaps d_i = E_i/e^r - u_i"""

    games: tuple
    rate: Rate
    prices: np.ndarray
    expectations: np.ndarray
    gaps: np.ndarray

    @property
    def n(self):
        return len(self.games)

    @classmethod
    def build(cls, games, rate, solver=None):
        games = tuple(games)
        if not games:
            raise GameSpecError("portfolio 'games' must not be empty")
        for other in games[1:]:
            if not same_distribution(games[0], other):
                raise GameSpecError("portfolio 'games' must share atom count and weights")
        solver = solver or GrowthSolver()

        prices = np.array([solver.price(g, rate).price for g in games])
        expectations = np.array([expectation(g) for g in games])
        gaps = expectations / rate.growth_target - prices
        if np.any(gaps < -GAP_TOL * np.maximum(prices, 1.0)):
            raise InvariantViolation(f"price exceeds discounted expectation: gaps {gaps.tolist()}")
        if np.any(gaps < 0):
            logger.warning("clipping round-off negative gaps %s to zero", gaps[gaps < 0].tolist())
        # round-off below zero would flip cut orientation
        gaps = np.maximum(gaps, 0.0)
        return cls(games=games, rate=rate, prices=prices, expectations=expectations, gaps=gaps)

    def adjusted_prices(self, t):
        return self.prices + np.asarray(t, dtype=float) * self.gaps

    def per_game(self, t=None):
        adjusted = self.adjusted_prices(np.zeros(self.n) if t is None else t)
        return [
            {"label": g.label, "u": u, "E": e, "d": d, "adjusted_u": a}
            for g, u, e, d, a in zip(self.games, self.prices, self.expectations, self.gaps, adjusted)
        ]


@dataclass(frozen=True)
class PriceVector:
    t: np.ndarray
    L_value: float
    worst_p: np.ndarray
    feasible: bool


@dataclass(frozen=True)
class MinNormResult:
    x: PriceVector
    norm: float
    certificate_L: float
    iterations: int
    cuts: List[np.ndarray] = field(default_factory=list)
    norm_history: List[float] = field(default_factory=list)


def load_portfolio(doc, rate=None, solver=None, quadrature=None):
    """Portfolio from {"rate": r, "games": [<game-spec>, ...]}; an explicit rate wins"""
    if not isinstance(doc, dict):
        doc = GameLoader.read_document(doc)
    if rate is None:
        if "rate" not in doc:
            raise GameSpecError("portfolio spec is missing field 'rate'")
        rate = Rate(GameLoader._number(doc, "rate"))
    specs = doc.get("games")
    if not isinstance(specs, list) or not specs:
        raise GameSpecError("portfolio spec needs a non-empty list field 'games'")
    loader = GameLoader(rate=rate, quadrature=quadrature)
    return Portfolio.build([loader.load_game(s) for s in specs], rate, solver)


def simplex_grid(n, m):
    """Barycentric grid of the simplex with m subdivisions per edge"""
    if n == 1:
        return np.ones((1, 1))
    points = []
    for bars in itertools.combinations(range(m + n - 1), n - 1):
        edges = (-1,) + bars + (m + n - 1,)
        points.append([edges[i + 1] - edges[i] - 1 for i in range(n)])
    return np.array(points, dtype=float) / m


def project_to_simplex(v):
    """Euclidean projection onto {p >= 0, sum p = 1}"""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    p = np.maximum(v - css[rho] / (rho + 1.0), 0.0)
    return p / p.sum()


class ActiveSetQP:
    """Primal active-set method for min 1/2 |x|^2 subject to G x <= h"""

    def __init__(self, max_iter=500, tol=1e-12):
        self.max_iter = max_iter
        self.tol = tol

    def solve(self, G, h, x0):
        n = G.shape[1]
        x = np.array(x0, dtype=float)
        slack = h - G @ x
        if np.any(slack < -1e-9):
            raise InfeasibleBoxError("starting point violates the constraints")
        active = [int(i) for i in np.flatnonzero(np.abs(slack) <= 1e-12)]
        active = self._independent(G, active)

        for _ in range(self.max_iter):
            step, lam = self._equality_step(G, active, x, n)

            if np.linalg.norm(step) <= self.tol * max(1.0, np.linalg.norm(x)):
                if not active or lam.min() >= -self.tol:
                    return x
                # drop the constraint with the most negative multiplier
                active.pop(int(np.argmin(lam)))
                continue

            # longest feasible step along `step`
            alpha, blocking = 1.0, None
            rates = G @ step
            for i in range(G.shape[0]):
                if i in active or rates[i] <= self.tol:
                    continue
                room = (h[i] - G[i] @ x) / rates[i]
                if room < alpha:
                    alpha, blocking = max(room, 0.0), i
            x = x + alpha * step
            if blocking is not None:
                active.append(blocking)

        raise ConvergenceError(f"active-set QP did not converge in {self.max_iter} iterations")

    @staticmethod
    def _equality_step(G, active, x, n):
        if not active:
            return -x, np.zeros(0)
        Ga = G[active]
        k = len(active)
        kkt = np.block([[np.eye(n), Ga.T], [Ga, np.zeros((k, k))]])
        rhs = np.concatenate([-x, np.zeros(k)])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        return sol[:n], sol[n:]

    @staticmethod
    def _independent(G, rows):
        kept = []
        for i in rows:
            trial = kept + [i]
            if np.linalg.matrix_rank(G[trial]) == len(trial):
                kept.append(i)
        return kept


class LeastSquaresPricer:
    def __init__(self, portfolio, solver=None, config=None):
        self.portfolio = portfolio
        self.solver = solver or GrowthSolver()
        self.config = config or CuttingPlaneConfig()
        self.qp = ActiveSetQP()
        self._grid = None
        self._grid_prices = None

    def price_of_mixture(self, p):
        """Price of the atom-wise convex combination sum p_i A_i"""
        p = np.asarray(p, dtype=float)
        if p.size != self.portfolio.n:
            raise GameSpecError("simplex point 'p' must have one weight per game")
        game = combine(self.portfolio.games, p)
        return self.solver.price(game, self.portfolio.rate).price

    def _ensure_grid(self):
        if self._grid is None:
            port = self.portfolio
            self._grid = simplex_grid(port.n, self.config.subdivisions(port.n))
            self._grid_prices = np.array([self.price_of_mixture(p) for p in self._grid])
            logger.debug("priced %d simplex grid points", len(self._grid))
        return self._grid, self._grid_prices

    def _ratio(self, p, denominators):
        return self.price_of_mixture(p) / float(p @ denominators)

    def l_value(self, t, extra_points=()):
        """L(t) and a maximizing simplex point: grid search, then Nelder-Mead refinement"""
        t = np.asarray(t, dtype=float)
        port = self.portfolio
        if t.size != port.n:
            raise GameSpecError("price vector 't' must have one entry per game")
        denominators = port.adjusted_prices(t)
        grid, prices = self._ensure_grid()

        ratios = prices / (grid @ denominators)
        best = int(np.argmax(ratios))
        best_value, best_p = float(ratios[best]), grid[best]
        for point in extra_points:
            value = self._ratio(point, denominators)
            if value > best_value:
                best_value, best_p = value, np.asarray(point, dtype=float)

        if port.n > 1:
            found = minimize(
                lambda z: -self._ratio(project_to_simplex(z), denominators),
                best_p,
                method="Nelder-Mead",
                options={
                    "maxiter": self.config.refine_iterations,
                    "xatol": 1e-9,
                    "fatol": 1e-13,
                },
            )
            if -found.fun > best_value:
                best_value, best_p = float(-found.fun), project_to_simplex(found.x)

        return best_value, best_p

    def price_vector(self, t, extra_points=()):
        """L(t) with its worst simplex point and the membership verdict"""
        value, worst = self.l_value(t, extra_points)
        return PriceVector(
            t=np.asarray(t, dtype=float),
            L_value=value,
            worst_p=worst,
            feasible=value <= 1.0 + self.config.membership_tol,
        )

    def membership(self, t):
        """Is t in T, i.e. L(t) <= 1 within the membership tolerance"""
        return self.price_vector(t).feasible

    def least_squares_prices(self):
        """Min-norm x in T by cutting planes, certified by L(x) = 1"""
        port = self.portfolio
        cfg = self.config
        n = port.n

        # box 0 <= x <= 1
        rows = [*(-np.eye(n)), *np.eye(n)]
        bounds = [*np.zeros(n), *np.ones(n)]
        cuts, history = [], []
        x = np.zeros(n)

        for iteration in range(cfg.max_cuts + 1):
            vector = self.price_vector(x, extra_points=cuts)
            value, p_star = vector.L_value, vector.worst_p
            logger.debug("iteration %d: L=%.12g at p=%s", iteration, value, np.round(p_star, 6))
            if value <= 1.0 + cfg.stop_tol:
                return MinNormResult(
                    x=vector,
                    norm=float(np.linalg.norm(x)),
                    certificate_L=value,
                    iterations=iteration,
                    cuts=cuts,
                    norm_history=history,
                )
            if iteration == cfg.max_cuts:
                break

            # sum p*_i (u_i + x_i d_i) >= u(p*), using a fresh price at p*
            exact = self.price_of_mixture(p_star)
            rows.append(-(p_star * port.gaps))
            bounds.append(float(p_star @ port.prices) - exact)
            cuts.append(p_star)
            logger.info("cut %d added at p=%s", len(cuts), np.round(p_star, 6))

            G, h = np.array(rows), np.array(bounds)
            if np.any(G @ np.ones(n) > h + 1e-9):
                raise InfeasibleBoxError("all-ones adjustment violates a cut; check portfolio data")
            x = self.qp.solve(G, h, np.ones(n))
            history.append(float(np.linalg.norm(x)))

        raise ConvergenceError(f"no certificate after {cfg.max_cuts} cuts (L={value:.12g})")

    def result_document(self, result):
        return {
            "x": result.x.t,
            "norm": result.norm,
            "L": result.certificate_L,
            "iterations": result.iterations,
            "worst_p": result.x.worst_p,
            "per_game": self.portfolio.per_game(result.x.t),
        }
