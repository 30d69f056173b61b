"""Value estimators for a single trajectory, plus array-batched versions.

Ratio convention: the cumulative ratio attached to step ``t`` is the product
of ``pi_e / pi_b`` over steps ``0..t`` inclusive, i.e. it already accounts
for the action taken at ``t``.  Each reward is then reweighted by every action
choice that led to it, which is what makes the step-wise and doubly robust
forms unbiased.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import BetaOutOfRange, EmptySample, InvalidK, ZeroBehaviorProbability

BETA_SWEEP = (0.0, 0.25, 0.35, 0.5)


class EstimatorKind(str, enum.Enum):
    MCTS = "mcts"
    STEP_IS = "is"
    DR = "dr"


@dataclass(frozen=True)
class EstimatorConfig:
    """Every tunable of the search and its value estimator.

    ``rho_clip=None`` disables ratio clipping.
    """

    kind: EstimatorKind = EstimatorKind.DR
    beta: float = 0.5
    tau: float = 1.0
    gamma: float = 1.0
    c: float = math.sqrt(2.0)
    k_folds: int = 3
    lam: float = 0.1
    rho_clip: Optional[float] = 10.0

    def __post_init__(self):
        object.__setattr__(self, "kind", EstimatorKind(self.kind))
        if not 0.0 <= self.beta <= 1.0:
            raise BetaOutOfRange(f"beta must lie in [0, 1], got {self.beta}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.c < 0:
            raise ValueError("exploration constant must be >= 0")
        if self.k_folds < 2:
            raise InvalidK(f"need at least 2 folds, got {self.k_folds}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.rho_clip is not None and not self.rho_clip > 0:
            raise ValueError("rho_clip must be positive or None")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value, "beta": self.beta, "tau": self.tau, "gamma": self.gamma,
            "c": self.c, "k_folds": self.k_folds, "lam": self.lam, "rho_clip": self.rho_clip,
        }


@dataclass(frozen=True)
class TrajectoryStep:
    reward: float
    pi_e: float
    pi_b: float
    v_hat_next: float = 0.0
    q_hat: float = 0.0
    key: Optional[tuple] = None


@dataclass
class Trajectory:
    steps: list = field(default_factory=list)
    v_hat_root: float = 0.0

    @property
    def horizon(self) -> int:
        return len(self.steps)


def cumulative_ratios(traj: Trajectory, rho_clip: Optional[float] = None) -> list[float]:
    out = []
    rho = 1.0
    for step in traj.steps:
        if step.pi_b <= 0:
            raise ZeroBehaviorProbability(f"pi_b = {step.pi_b} at step {len(out)}")
        rho *= step.pi_e / step.pi_b
        out.append(rho if rho_clip is None else min(rho, rho_clip))
    return out


def discounted_return(rewards: Sequence[float], gamma: float) -> float:
    return math.fsum(gamma ** t * r for t, r in enumerate(rewards))


def v_mcts(reward_samples: Sequence[float]) -> float:
    if len(reward_samples) == 0:
        raise EmptySample("cannot average an empty sample")
    return math.fsum(reward_samples) / len(reward_samples)


def v_is(traj: Trajectory, gamma: float, rho_clip: Optional[float] = None) -> float:
    """Whole-trajectory importance weight times the discounted return."""
    if not traj.steps:
        raise EmptySample("trajectory IS needs at least one step")
    rho = cumulative_ratios(traj, rho_clip)[-1]
    return rho * discounted_return([s.reward for s in traj.steps], gamma)


def v_step_is(traj: Trajectory, gamma: float, rho_clip: Optional[float] = None) -> float:
    rhos = cumulative_ratios(traj, rho_clip)
    return math.fsum(gamma ** t * rho * s.reward for t, (rho, s) in enumerate(zip(rhos, traj.steps)))


def v_dr(traj: Trajectory, gamma: float, rho_clip: Optional[float] = None) -> float:
    rhos = cumulative_ratios(traj, rho_clip)
    corrections = (
        gamma ** t * rho * (s.reward + gamma * s.v_hat_next - s.q_hat)
        for t, (rho, s) in enumerate(zip(rhos, traj.steps))
    )
    return traj.v_hat_root + math.fsum(corrections)


def v_hybrid(v_mcts_val: float, v_dr_val: float, beta: float) -> float:
    if not 0.0 <= beta <= 1.0:
        raise BetaOutOfRange(f"beta must lie in [0, 1], got {beta}")
    if beta == 1.0:
        return v_mcts_val
    if beta == 0.0:
        return v_dr_val
    return beta * v_mcts_val + (1.0 - beta) * v_dr_val


def v_hat(edges: Sequence[tuple[float, Sequence[float]]]) -> float:
    """Target-policy-weighted mean of per-action sample means (empty actions count as 0)."""
    total = 0.0
    for prob, samples in edges:
        if len(samples):
            total += prob * (math.fsum(samples) / len(samples))
    return total


def q_hat_kfold(rewards: Sequence[float], k: int) -> float:
    """Average of the means of ``k`` contiguous, near-equal folds in arrival order.

    Falls back to the plain mean with fewer than ``k`` samples and to 0 with none.
    """
    if k < 2:
        raise InvalidK(f"need at least 2 folds, got {k}")
    n = len(rewards)
    if n == 0:
        return 0.0
    if n < k:
        return math.fsum(rewards) / n
    base, extra = divmod(n, k)
    fold_means = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        fold_means.append(math.fsum(rewards[start:start + size]) / size)
        start += size
    return math.fsum(fold_means) / k


# ------------------------------------------------------------------ batches


def _clip_value(rho_clip: Optional[float]) -> float:
    return np.inf if rho_clip is None else float(rho_clip)


def _check_pi_b(pi_b: np.ndarray) -> None:
    if np.any(pi_b <= 0):
        raise ZeroBehaviorProbability("behavior probability 0 in batch")


def batch_cumulative_ratios(pi_e, pi_b, rho_clip=None, backend=None) -> np.ndarray:
    """Row-wise cumulative ratios for ``(n, H)`` probability arrays."""
    backend = backend or kernels.ACTIVE
    pi_e, pi_b = np.ascontiguousarray(pi_e, np.float64), np.ascontiguousarray(pi_b, np.float64)
    _check_pi_b(pi_b)
    return backend.cumulative_ratios(pi_e, pi_b, _clip_value(rho_clip))


def batch_step_is(pi_e, pi_b, rewards, gamma, rho_clip=None, backend=None) -> np.ndarray:
    backend = backend or kernels.ACTIVE
    arrs = [np.ascontiguousarray(x, np.float64) for x in (pi_e, pi_b, rewards)]
    _check_pi_b(arrs[1])
    return backend.step_is(*arrs, float(gamma), _clip_value(rho_clip))


def batch_dr(v_hat_root, pi_e, pi_b, rewards, v_hat_next, q_hat, gamma, rho_clip=None, backend=None) -> np.ndarray:
    backend = backend or kernels.ACTIVE
    arrs = [np.ascontiguousarray(x, np.float64) for x in (v_hat_root, pi_e, pi_b, rewards, v_hat_next, q_hat)]
    _check_pi_b(arrs[2])
    return backend.dr(*arrs, float(gamma), _clip_value(rho_clip))
