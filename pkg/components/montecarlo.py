"""Repeated fractional reinvestment, simulated to check theoretical growth rates.

Each round the investor stakes proportion t of current capital at price u, so
wealth is multiplied by t*payoff/u + 1 - t.  Factors are accumulated in log
space; raw wealth is never formed.

Draws are split into fixed-size blocks, each with its own seed derived from
(seed, block index).  Worker threads process blocks in any order and the
per-block statistics are merged in block order, so results do not depend on
the number of streams.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from utils.errors import DomainError, GameSpecError
from utils.growth_solver import GrowthSolver

logger = logging.getLogger(__name__)

DEFAULT_STEPS = 100_000
DEFAULT_BLOCK_STEPS = 10_000


@dataclass(frozen=True)
class SimulationSpec:
    game: object
    price: float
    proportion: float
    steps: int = DEFAULT_STEPS
    seed: int = 0
    streams: int = 1
    block_steps: int = DEFAULT_BLOCK_STEPS

    def __post_init__(self):
        if self.steps < 1:
            raise GameSpecError(f"'steps' must be at least 1, got {self.steps!r}")
        if self.streams < 1:
            raise GameSpecError(f"'streams' must be at least 1, got {self.streams!r}")
        if self.block_steps < 1:
            raise GameSpecError(f"'block_steps' must be at least 1, got {self.block_steps!r}")
        if not 0 <= self.seed < 2 ** 64:
            raise GameSpecError(f"'seed' must be an unsigned 64-bit integer, got {self.seed!r}")
        if not self.price > 0:
            raise GameSpecError(f"price 'u' must be positive, got {self.price!r}")
        if not 0.0 <= self.proportion <= 1.0:
            raise GameSpecError(f"proportion 't' must lie in [0, 1], got {self.proportion!r}")

    def log_factors(self):
        factors = 1.0 + self.proportion * (self.game.payoffs / self.price - 1.0)
        if np.any(factors <= 0):
            raise DomainError(
                f"nonpositive wealth factor at u={self.price:.6g}, t={self.proportion:.6g}"
            )
        return np.log(factors)


@dataclass(frozen=True)
class SimulationResult:
    geometric_mean_growth: float
    mean_log: float
    stderr_log: float
    steps: int
    block_means: List[float]

    def z_score(self, r):
        """One-sample z of mean log growth against r; None when the spread is zero"""
        if self.stderr_log == 0:
            return None
        return (self.mean_log - r) / self.stderr_log

    def to_dict(self, r=None):
        return {
            "geometric_mean": self.geometric_mean_growth,
            "mean_log": self.mean_log,
            "stderr_log": self.stderr_log,
            "steps": self.steps,
            "z_vs": None if r is None else self.z_score(r),
        }


class MonteCarloSimulator:
    def simulate(self, spec):
        """Simulate spec.steps rounds and summarize the log growth"""
        log_factors = spec.log_factors()
        cdf = np.cumsum(spec.game.weights)
        n_blocks = -(-spec.steps // spec.block_steps)

        def run_block(block):
            size = min(spec.block_steps, spec.steps - block * spec.block_steps)
            rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(block,)))
            # inverse transform on cumulative weights
            idx = np.searchsorted(cdf, rng.random(size), side="right")
            logs = log_factors[np.minimum(idx, len(cdf) - 1)]
            mean = float(logs.mean())
            return size, mean, float(np.sum((logs - mean) ** 2))

        with ThreadPoolExecutor(max_workers=spec.streams) as pool:
            blocks = list(pool.map(run_block, range(n_blocks)))

        count, mean, m2 = 0, 0.0, 0.0
        for size, block_mean, block_m2 in blocks:
            total = count + size
            delta = block_mean - mean
            mean += delta * size / total
            m2 += block_m2 + delta * delta * count * size / total
            count = total

        stderr = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
        logger.debug("simulated %d steps in %d blocks", count, n_blocks)
        return SimulationResult(
            geometric_mean_growth=math.exp(mean),
            mean_log=mean,
            stderr_log=stderr,
            steps=count,
            block_means=[b[1] for b in blocks],
        )


@dataclass(frozen=True)
class VerificationReport:
    price: float
    proportion: float
    regime: str
    theoretical_growth: float
    simulated_growth: float
    mean_log: float
    stderr_log: float
    z_score: Optional[float]

    def to_dict(self):
        return {
            "u": self.price,
            "t": self.proportion,
            "regime": self.regime,
            "theoretical_growth": self.theoretical_growth,
            "simulated_growth": self.simulated_growth,
            "mean_log": self.mean_log,
            "stderr_log": self.stderr_log,
            "z": self.z_score,
        }


def verify_price(game, rate, solver=None, steps=DEFAULT_STEPS, seed=0, streams=1):
    """Price a game, simulate at (u*, t*), and compare with e^r"""
    solver = solver or GrowthSolver()
    outcome = solver.price(game, rate)
    result = MonteCarloSimulator().simulate(
        SimulationSpec(
            game=game,
            price=outcome.price,
            proportion=outcome.proportion,
            steps=steps,
            seed=seed,
            streams=streams,
        )
    )
    return VerificationReport(
        price=outcome.price,
        proportion=outcome.proportion,
        regime=outcome.regime.value,
        theoretical_growth=rate.growth_target,
        simulated_growth=result.geometric_mean_growth,
        mean_log=result.mean_log,
        stderr_log=result.stderr_log,
        z_score=result.z_score(rate.r),
    )
