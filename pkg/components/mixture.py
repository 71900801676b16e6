import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from utils.errors import GameSpecError, InvariantViolation, NoSolutionError, PricingError
from utils.game_model import geometric_price, harmonic_price, mix, same_distribution
from utils.growth_solver import GrowthSolver, Regime
from utils.number_format import NumberFormatter

logger = logging.getLogger(__name__)

CROSSING_XTOL = 1e-10
# chord gaps at or below this, relative to the curve scale, are round-off
CONCAVITY_FLOOR = 1e-12


@dataclass(frozen=True)
class MixtureCurves:
    """f, g, h, u sampled over p for the mixtures pA + (1-p)B; absent g is NaN"""

    grid: np.ndarray
    f_vals: np.ndarray
    g_vals: np.ndarray
    h_vals: np.ndarray
    u_vals: np.ndarray
    regime: Tuple[Regime, ...]

    def curve(self, name):
        return {"f": self.f_vals, "g": self.g_vals, "h": self.h_vals, "u": self.u_vals}[name]

    def to_frame(self):
        return pd.DataFrame(
            {
                "p": self.grid,
                "f": self.f_vals,
                "g": self.g_vals,
                "h": self.h_vals,
                "u": self.u_vals,
                "regime": [r.value for r in self.regime],
            }
        )

    def to_csv(self, path_or_buf=None):
        return self.to_frame().to_csv(
            path_or_buf, index=False, float_format=NumberFormatter.CSV_FLOAT_FORMAT, na_rep=""
        )

    def max_jump(self, name="u"):
        return float(np.max(np.abs(np.diff(self.curve(name)))))


@dataclass(frozen=True)
class ConcavityReport:
    curve: str
    violation: float
    triple: Optional[Tuple[float, float, float]] = None

    @property
    def passed(self):
        return self.violation == 0.0


class MixtureAnalyzer:
    def __init__(self, solver=None):
        self.solver = solver or GrowthSolver()

    def curves(self, gA, gB, rate, n_grid=101, insert_crossings=True):
        """Sample f, g, h, u on a uniform p-grid, refined at f = h crossings"""
        if n_grid < 3:
            raise GameSpecError(f"'n_grid' must be at least 3, got {n_grid!r}")
        if not same_distribution(gA, gB):
            raise GameSpecError("games must share atom count and weights to be mixed")

        grid = np.linspace(0.0, 1.0, n_grid)
        if insert_crossings:
            grid = self._insert_crossings(gA, gB, rate, grid)

        rows = [self._evaluate(gA, gB, rate, p) for p in grid]
        f_vals, g_vals, h_vals, u_vals, regime = zip(*rows)
        return MixtureCurves(
            grid=grid,
            f_vals=np.array(f_vals),
            g_vals=np.array(g_vals),
            h_vals=np.array(h_vals),
            u_vals=np.array(u_vals),
            regime=tuple(regime),
        )

    def _insert_crossings(self, gA, gB, rate, grid):
        def gap(p):
            game = mix(gA, gB, p)
            return geometric_price(game, rate) - harmonic_price(game)

        gaps = np.array([gap(p) for p in grid])
        roots = []
        for i in range(len(grid) - 1):
            left, right = gaps[i], gaps[i + 1]
            if left == 0.0 or right == 0.0 or np.sign(left) == np.sign(right):
                continue
            root = bisect(gap, grid[i], grid[i + 1], xtol=CROSSING_XTOL)
            logger.info("regime crossing f = h inserted at p=%.12g", root)
            roots.append(root)
        if not roots:
            return grid
        return np.unique(np.concatenate([grid, roots]))

    def _evaluate(self, gA, gB, rate, p):
        game = mix(gA, gB, p)
        f = geometric_price(game, rate)
        h = harmonic_price(game)
        try:
            outcome = self.solver.price(game, rate)
            if outcome.regime is Regime.INTERIOR:
                g = outcome.price
            else:
                g = self._try_interior(game, rate)
        except PricingError as e:
            raise type(e)(f"at p={p:.12g}: {e}") from e
        return f, g, h, outcome.price, outcome.regime

    def _try_interior(self, game, rate):
        try:
            return self.solver.solve_interior(game, rate).price
        except NoSolutionError:
            return math.nan

    @staticmethod
    def check_concavity(vals, grid, name="curve"):
        """Largest chord-above-curve gap over consecutive triples; 0 means concave"""
        vals = np.asarray(vals, dtype=float)
        grid = np.asarray(grid, dtype=float)
        if vals.size < 3 or vals.shape != grid.shape:
            raise GameSpecError("concavity check needs at least 3 samples matching the grid")

        p_i, p_k, p_j = grid[:-2], grid[1:-1], grid[2:]
        v_i, v_k, v_j = vals[:-2], vals[1:-1], vals[2:]
        lam = (p_j - p_k) / (p_j - p_i)
        gaps = lam * v_i + (1.0 - lam) * v_j - v_k
        gaps = np.where(np.isfinite(gaps), gaps, -np.inf)
        finite = np.abs(vals[np.isfinite(vals)])
        floor = CONCAVITY_FLOOR * max(1.0, float(finite.max()) if finite.size else 1.0)

        worst = int(np.argmax(gaps))
        if gaps[worst] <= floor:
            return ConcavityReport(curve=name, violation=0.0)
        return ConcavityReport(
            curve=name,
            violation=float(gaps[worst]),
            triple=(float(p_i[worst]), float(p_j[worst]), float(lam[worst])),
        )

    def concavity_reports(self, c):
        return [self.check_concavity(c.curve(name), c.grid, name) for name in ("f", "g", "h", "u")]

    @staticmethod
    def equivalence_points(c, tol):
        """Grid points where f = h, checking that g agrees there as well"""
        points = []
        for p, f, g, h in zip(c.grid, c.f_vals, c.g_vals, c.h_vals):
            # f = h = 0 on zero-payoff mixtures says nothing about the regime
            if f <= 0 or abs(f - h) > tol:
                continue
            if math.isfinite(g) and (abs(f - g) > 10 * tol or abs(g - h) > 10 * tol):
                raise InvariantViolation(
                    f"f = h but g differs at p={p:.12g}: f={f:.12g}, g={g:.12g}, h={h:.12g}"
                )
            points.append(float(p))
        return points
