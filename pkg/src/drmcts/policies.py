"""Behavior and target policies over discrete action sets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidTemperature, NoLegalAction

PREFERRED_MOVES = (4, 0, 2, 6, 8, 1, 3, 5, 7)
_LINES = ((0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6))


@dataclass(frozen=True)
class PolicyDistribution:
    """Probabilities over an ordered action support."""

    support: tuple
    probs: tuple

    def __post_init__(self):
        support = tuple(int(a) for a in self.support)
        probs = tuple(float(p) for p in self.probs)
        if len(support) != len(probs):
            raise ValueError("support and probs differ in length")
        if support and (min(probs) < 0 or abs(math.fsum(probs) - 1.0) > 1e-9):
            raise ValueError(f"not a probability vector: {probs}")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    def prob(self, action: int) -> float:
        try:
            return self.probs[self.support.index(action)]
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    def sample(self, rng: np.random.Generator) -> int:
        u = rng.random()
        acc = 0.0
        for a, p in zip(self.support, self.probs):
            acc += p
            if u < acc:
                return a
        return self.support[-1]


@dataclass(frozen=True)
class MixtureParams:
    lam: float = 0.1

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")


def _has_line(cells) -> bool:
    return any(cells[a] != 0 and cells[a] == cells[b] == cells[c] for a, b, c in _LINES)


def _empty_cells(state) -> list[int]:
    if _has_line(state.cells):
        return []
    return [i for i, c in enumerate(state.cells) if c == 0]


def heuristic_action(state, rng: Optional[np.random.Generator] = None) -> int:
    """Centre, then corners, then edges: the first free cell in that order."""
    available = _empty_cells(state)
    if not available:
        raise NoLegalAction("no legal move in a finished position")
    free = set(available)
    for move in PREFERRED_MOVES:
        if move in free:
            return move
    # unreachable for a 3x3 board, kept as the documented random fallback
    rng = rng if rng is not None else np.random.default_rng()
    return int(rng.choice(available))


def heuristic_distribution(state) -> PolicyDistribution:
    available = _empty_cells(state)
    if not available:
        raise NoLegalAction("no legal move in a finished position")
    chosen = heuristic_action(state)
    return PolicyDistribution(tuple(available), tuple(1.0 if a == chosen else 0.0 for a in available))


def uniform_distribution(actions: Iterable[int]) -> PolicyDistribution:
    actions = tuple(actions)
    if not actions:
        raise NoLegalAction("empty action set")
    return PolicyDistribution(actions, (1.0 / len(actions),) * len(actions))


def mix_with_uniform(base: PolicyDistribution, params) -> PolicyDistribution:
    """``lam / |A| + (1 - lam) * base(a)`` over the base support.

    ``params`` may be a :class:`MixtureParams` or a bare float.
    """
    lam = params.lam if isinstance(params, MixtureParams) else MixtureParams(float(params)).lam
    n = len(base.support)
    return PolicyDistribution(base.support, tuple(lam / n + (1.0 - lam) * p for p in base.probs))


def softmax(values: Sequence[float], tau: float) -> np.ndarray:
    if not tau > 0:
        raise InvalidTemperature(f"temperature must be positive, got {tau}")
    z = np.asarray(values, dtype=np.float64) / tau
    z = np.exp(z - z.max())
    return z / z.sum()


def target_policy(q_values: Sequence[tuple[int, float]], tau: float = 1.0) -> PolicyDistribution:
    """Boltzmann distribution over Q-values at temperature ``tau``."""
    if not q_values:
        raise NoLegalAction("target policy needs at least one action")
    actions = [a for a, _ in q_values]
    probs = softmax([q for _, q in q_values], tau)
    return PolicyDistribution(tuple(actions), tuple(probs))
