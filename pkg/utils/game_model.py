"""Games as finite weighted payoff atoms, with the elementary price functionals.

A game pairs a nonnegative payoff with a probability distribution.  Continuous
games are reduced to atoms at ingestion (see ``components.options``), so every
integral over dF becomes a weighted sum over atoms here.
"""
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from utils.errors import GameSpecError

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOL = 1e-12
RENORMALIZE_TOL = 1e-9
SAME_DISTRIBUTION_TOL = 1e-12


@dataclass(frozen=True)
class Rate:
    """Continuously compounded rate per unit horizon"""

    r: float

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r <= 0:
            raise GameSpecError(f"rate 'r' must be positive, got {self.r!r}")
        object.__setattr__(self, "r", r)

    @property
    def growth_target(self):
        return math.exp(self.r)


@dataclass(frozen=True, eq=False)
class Game:
    """Finite weighted set of payoff atoms; build through make_game() to validate"""

    payoffs: np.ndarray
    weights: np.ndarray
    label: str = field(default="")

    @property
    def atoms(self):
        return list(zip(self.payoffs.tolist(), self.weights.tolist()))

    @property
    def size(self):
        return len(self.payoffs)

    @property
    def min_payoff(self):
        """xi, the infimum of the payoff"""
        return float(self.payoffs.min())

    @property
    def has_zero_payoff(self):
        return self.min_payoff == 0.0

    def __repr__(self):
        return f"Game(label={self.label!r}, atoms={self.size}, xi={self.min_payoff:.6g})"


def _frozen(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


def make_game(payoffs, weights, label=""):
    """Validate atoms and build a Game, renormalizing near-unit weight sums"""
    payoffs = np.asarray(payoffs, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()

    if payoffs.size == 0:
        raise GameSpecError("game 'atoms' must not be empty")
    if payoffs.shape != weights.shape:
        raise GameSpecError("game 'atoms': payoff and weight counts differ")
    if not np.all(np.isfinite(payoffs)):
        raise GameSpecError("game 'payoff' values must be finite")
    if not np.all(np.isfinite(weights)):
        raise GameSpecError("game 'w' values must be finite")
    if np.any(payoffs < 0):
        raise GameSpecError(f"game 'payoff' must be nonnegative, got {payoffs.min():.6g}")
    if not np.any(payoffs > 0):
        raise GameSpecError("game 'payoff': at least one payoff must be positive")
    # Zero-weight atoms are rejected rather than silently dropped
    if np.any(weights <= 0):
        raise GameSpecError("game 'w' must be strictly positive for every atom")

    total = float(weights.sum())
    if abs(total - 1.0) > RENORMALIZE_TOL:
        raise GameSpecError(f"game 'w' must sum to 1, got {total:.12g}")
    weights = weights / total

    return Game(payoffs=_frozen(payoffs), weights=_frozen(weights), label=str(label))


def two_point(a, b, label=""):
    """Game paying a or b with probability 1/2 each"""
    return make_game([a, b], [0.5, 0.5], label=label)


def expectation(g):
    """E: sum of payoff * weight"""
    return float(np.dot(g.payoffs, g.weights))


def geometric_price(g, rate):
    """f: exp(sum weight * log payoff) / e^r, 0 when a zero payoff has positive weight"""
    if g.has_zero_payoff:
        return 0.0
    return math.exp(float(np.dot(g.weights, np.log(g.payoffs))) - rate.r)


def harmonic_price(g):
    """h: 1 / sum(weight / payoff), 0 when a zero payoff has positive weight"""
    if g.has_zero_payoff:
        return 0.0
    return 1.0 / float(np.dot(g.weights, 1.0 / g.payoffs))


def scale(g, k):
    """Multiply every payoff by k > 0"""
    k = float(k)
    if not math.isfinite(k) or k <= 0:
        raise GameSpecError(f"scale factor 'k' must be positive, got {k!r}")
    return Game(payoffs=_frozen(g.payoffs * k), weights=g.weights, label=g.label)


def same_distribution(gA, gB):
    return gA.size == gB.size and np.allclose(
        gA.weights, gB.weights, rtol=0.0, atol=SAME_DISTRIBUTION_TOL
    )


def mix(gA, gB, p):
    """Atom-wise payoff p*a + (1-p)*b on the shared distribution"""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise GameSpecError(f"mixing weight 'p' must lie in [0, 1], got {p!r}")
    if not same_distribution(gA, gB):
        raise GameSpecError("games must share atom count and weights to be mixed")
    payoffs = p * gA.payoffs + (1.0 - p) * gB.payoffs
    return Game(payoffs=_frozen(payoffs), weights=gA.weights, label=f"mix({p:.6g})")


def combine(games, p):
    """Atom-wise convex combination sum p_i * A_i of games on one distribution"""
    p = np.asarray(p, dtype=float)
    if len(games) != p.size:
        raise GameSpecError("simplex point 'p' must have one weight per game")
    if np.any(p < 0) or abs(float(p.sum()) - 1.0) > RENORMALIZE_TOL:
        raise GameSpecError("simplex point 'p' must be nonnegative and sum to 1")
    base = games[0]
    for other in games[1:]:
        if not same_distribution(base, other):
            raise GameSpecError("portfolio games must share atom count and weights")
    # A vertex returns the pure game's payoffs bit for bit
    hits = np.flatnonzero(p == 1.0)
    if hits.size == 1:
        return games[int(hits[0])]
    payoffs = sum(float(pi) * gi.payoffs for pi, gi in zip(p, games) if pi > 0)
    return Game(payoffs=_frozen(payoffs), weights=base.weights, label="mixture")


class GameLoader:
    """Builds games from game-spec documents (dicts or JSON files)"""

    SPEC_TYPES = ("two_point", "discrete", "lognormal_put")

    def __init__(self, rate=None, quadrature=None):
        # lognormal_put documents need the rate, which the document itself never carries
        self.rate = rate
        self.quadrature = quadrature

    def load_game(self, spec):
        """Return a normalized Game from a spec dict, JSON text path, or Path"""
        if isinstance(spec, (str, Path)):
            spec = self.read_document(spec)
        if not isinstance(spec, dict):
            raise GameSpecError("game spec must be a JSON object")

        kind = spec.get("type")
        if kind is None:
            raise GameSpecError("game spec is missing field 'type'")
        label = str(spec.get("label", ""))

        if kind == "two_point":
            a = self._number(spec, "a")
            b = self._number(spec, "b")
            game = two_point(a, b, label=label or f"two_point({a:g},{b:g})")
        elif kind == "discrete":
            atoms = spec.get("atoms")
            if not isinstance(atoms, list) or not atoms:
                raise GameSpecError("discrete game spec needs a non-empty list field 'atoms'")
            payoffs, weights = [], []
            for i, atom in enumerate(atoms):
                if not isinstance(atom, dict):
                    raise GameSpecError(f"field 'atoms[{i}]' must be an object")
                payoffs.append(self._number(atom, "payoff", f"atoms[{i}]."))
                weights.append(self._number(atom, "w", f"atoms[{i}]."))
            game = make_game(payoffs, weights, label=label or "discrete")
        elif kind == "lognormal_put":
            game = self._load_put(spec, label)
        else:
            raise GameSpecError(
                f"field 'type' must be one of {', '.join(self.SPEC_TYPES)}, got {kind!r}"
            )

        logger.debug("loaded %r", game)
        return game

    def _load_put(self, spec, label):
        from components.options import PutModel, QuadratureConfig, build_put_game

        if self.rate is None:
            raise GameSpecError("lognormal_put spec needs a rate 'r' supplied separately")
        model = PutModel(
            S=self._number(spec, "S"),
            K=self._number(spec, "K"),
            T=self._number(spec, "T"),
            sigma=self._number(spec, "sigma"),
            r=self.rate.r,
        )
        game = build_put_game(model, self.quadrature or QuadratureConfig())
        if label:
            game = Game(payoffs=game.payoffs, weights=game.weights, label=label)
        return game

    @staticmethod
    def read_document(path):
        """Parse a JSON document from disk"""
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise GameSpecError(f"file not found: {path}") from None
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise GameSpecError(f"{path}: not valid JSON ({e.msg} at line {e.lineno})") from None

    @staticmethod
    def _number(doc, key, prefix=""):
        if key not in doc:
            raise GameSpecError(f"missing field '{prefix}{key}'")
        value = doc[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise GameSpecError(f"field '{prefix}{key}' must be a number, got {value!r}")
        return float(value)


def load_game(spec, rate=None):
    """Convenience wrapper around GameLoader.load_game"""
    return GameLoader(rate=rate).load_game(spec)
