"""Ground truth: exact Tic-Tac-Toe minimax, finite-horizon DP, estimator benches."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels
from .environments import FiniteMdp, GameState, _winner, default_mdp
from .errors import ZeroBehaviorProbability
from .estimators import EstimatorConfig, EstimatorKind, batch_dr, batch_step_is

# ------------------------------------------------------------- minimax


@lru_cache(maxsize=None)
def _negamax(cells: tuple, to_move: int) -> float:
    w = _winner(cells)
    if w is not None:
        return 1.0 if w == to_move else 0.0
    if 0 not in cells:
        return 0.5
    best = 0.0
    other = 3 - to_move
    for i, c in enumerate(cells):
        if c == 0:
            child = cells[:i] + (to_move,) + cells[i + 1:]
            best = max(best, 1.0 - _negamax(child, other))
            if best == 1.0:
                break
    return best


def minimax_value(state: GameState) -> tuple[float, frozenset]:
    """Game value for the side to move (1 win, 0.5 draw, 0 loss) and its optimal moves."""
    value = _negamax(state.cells, int(state.to_move))
    if _winner(state.cells) is not None or 0 not in state.cells:
        return value, frozenset()
    other = 3 - int(state.to_move)
    best = set()
    for i, c in enumerate(state.cells):
        if c == 0:
            child = state.cells[:i] + (int(state.to_move),) + state.cells[i + 1:]
            if 1.0 - _negamax(child, other) == value:
                best.add(i)
    return value, frozenset(best)


def minimax_player(state: GameState, seed: int = 0) -> int:
    """Perfect player; picks the lowest-index optimal move."""
    return min(minimax_value(state)[1])


# ------------------------------------------------------------------- DP


@dataclass(frozen=True)
class DpValueTable:
    """``v[s, t]`` for t in 0..H (``v[:, H] == 0``) and ``q[s, a, t]`` for t < H."""

    v: np.ndarray
    q: np.ndarray

    def value(self, s: int, t: int = 0) -> float:
        return float(self.v[s, t])


def _policy_table(pi, mdp: FiniteMdp) -> np.ndarray:
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape == (mdp.n_states, mdp.n_actions):
        pi = np.broadcast_to(pi, (mdp.horizon,) + pi.shape)
    if pi.shape != (mdp.horizon, mdp.n_states, mdp.n_actions):
        raise ValueError(f"policy table has shape {pi.shape}")
    if np.any(pi < 0) or np.max(np.abs(pi.sum(axis=-1) - 1.0)) > 1e-9:
        raise ValueError("policy rows must be probability vectors")
    return pi


def dp_evaluate(mdp: FiniteMdp, pi_e, gamma: float = 1.0) -> DpValueTable:
    """Backward induction for a (possibly time-dependent) policy table."""
    pi = _policy_table(pi_e, mdp)
    n_s, n_a, horizon = mdp.n_states, mdp.n_actions, mdp.horizon
    v = np.zeros((n_s, horizon + 1))
    q = np.zeros((n_s, n_a, horizon))
    for t in range(horizon - 1, -1, -1):
        q[:, :, t] = mdp.reward + gamma * mdp.transition @ v[:, t + 1]
        v[:, t] = (pi[t] * q[:, :, t]).sum(axis=1)
    return DpValueTable(v, q)


# --------------------------------------------------------------- benches


@dataclass(frozen=True)
class EstimatorStats:
    n: int
    mean: float
    variance: float
    std_error: float

    @classmethod
    def from_samples(cls, x) -> "EstimatorStats":
        x = np.asarray(x, dtype=np.float64)
        n = x.size
        var = float(x.var(ddof=1)) if n > 1 else 0.0
        return cls(n, float(x.mean()), var, math.sqrt(var / n) if n else 0.0)

    def merge(self, other: "EstimatorStats") -> "EstimatorStats":
        """Pooled statistics of two disjoint samples (parallel variance update)."""
        n = self.n + other.n
        if n == 0:
            return self
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.variance * max(self.n - 1, 0) + other.variance * max(other.n - 1, 0)
        m2 += delta * delta * self.n * other.n / n
        var = m2 / (n - 1) if n > 1 else 0.0
        return EstimatorStats(n, mean, var, math.sqrt(var / n))

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "variance": self.variance, "std_error": self.std_error}


def default_bench(seed: int = 0):
    """``(mdp, pi_e, pi_b)`` used by the validation suites."""
    mdp = default_mdp(seed)
    rng = np.random.default_rng(seed + 1)
    pi_e = rng.dirichlet([2.0] * mdp.n_actions, size=mdp.n_states)
    pi_b = np.full((mdp.n_states, mdp.n_actions), 1.0 / mdp.n_actions)
    return mdp, pi_e, pi_b


def _sample(mdp: FiniteMdp, policy: np.ndarray, u_action, u_next, backend):
    trans_cum = np.cumsum(mdp.transition, axis=2)
    policy_cum = np.cumsum(policy, axis=1)
    return backend.sample_mdp(trans_cum, policy_cum, mdp.initial_state, mdp.horizon, u_action, u_next)


def _batch_estimates(mdp, pi_e, pi_b, dp, config, n, rng, q_model, epsilon, backend):
    horizon, n_a = mdp.horizon, mdp.n_actions
    # fixed draw order keeps trajectories and noise common across kinds and epsilons
    u_b = rng.random((2, n, horizon))
    u_e = rng.random((2, n, horizon))
    noise = rng.uniform(-1.0, 1.0, size=(n, horizon, n_a))

    states, actions = _sample(mdp, pi_b, u_b[0], u_b[1], backend)
    s, a = states[:, :-1], actions
    rewards = mdp.reward[s, a]
    p_e, p_b = pi_e[s, a], pi_b[s, a]

    if q_model == "zero":
        q_full = np.zeros((n, horizon, n_a))
    else:
        q_full = dp.q[s, :, np.arange(horizon)]  # (n, H, A)
        if q_model == "noise":
            q_full += epsilon * noise
        elif q_model != "exact":
            raise ValueError(f"unknown Q-hat model {q_model!r}")
    v_full = (pi_e[s] * q_full).sum(axis=2)
    q_hat = np.take_along_axis(q_full, a[:, :, None], axis=2)[:, :, 0]
    v_next = np.zeros((n, horizon))
    v_next[:, :-1] = v_full[:, 1:]

    on_states, on_actions = _sample(mdp, pi_e, u_e[0], u_e[1], backend)
    disc = config.gamma ** np.arange(horizon)
    g_on = (mdp.reward[on_states[:, :-1], on_actions] * disc).sum(axis=1)

    if config.kind is EstimatorKind.MCTS:
        return g_on
    if config.kind is EstimatorKind.STEP_IS:
        return batch_step_is(p_e, p_b, rewards, config.gamma, config.rho_clip, backend)
    dr = batch_dr(v_full[:, 0], p_e, p_b, rewards, v_next, q_hat, config.gamma, config.rho_clip, backend)
    return config.beta * g_on + (1.0 - config.beta) * dr


def measure_estimator(
    mdp: FiniteMdp,
    pi_e,
    pi_b,
    config: EstimatorConfig,
    n_samples: int,
    seed: int,
    q_model: str = "exact",
    epsilon: float = 0.0,
    batch_size: int = 5000,
    workers: int = 1,
    backend=None,
) -> EstimatorStats:
    """Sample statistics of one estimator on ``n_samples`` independent draws.

    ``config.kind`` selects the estimate per draw: ``mcts`` is the on-policy
    (``pi_e``) Monte Carlo return; ``is`` the step-wise IS estimate from a
    ``pi_b`` trajectory; ``dr`` the hybrid ``beta * mcts + (1 - beta) * DR``
    (``beta = 0`` gives plain DR).  ``q_model`` picks the value model fed to
    DR: ``exact`` DP values, ``noise`` (exact + ``epsilon`` * U(-1, 1) per
    draw, V-hat recomputed from the perturbed Q-hat) or ``zero``.

    Batches use streams spawned from ``seed`` by batch index, so the result
    does not depend on ``workers``.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    pi_e = np.asarray(pi_e, dtype=np.float64)
    pi_b = np.asarray(pi_b, dtype=np.float64)
    if np.any(pi_b <= 0):
        raise ZeroBehaviorProbability("behavior policy must be strictly positive")
    backend = backend or kernels.ACTIVE
    dp = dp_evaluate(mdp, pi_e, config.gamma)
    sizes = [batch_size] * (n_samples // batch_size)
    if n_samples % batch_size:
        sizes.append(n_samples % batch_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i: int) -> EstimatorStats:
        rng = np.random.default_rng(streams[i])
        x = _batch_estimates(mdp, pi_e, pi_b, dp, config, sizes[i], rng, q_model, epsilon, backend)
        return EstimatorStats.from_samples(x)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)
    return total


def dp_value(mdp: FiniteMdp, pi_e, gamma: float = 1.0, state: Optional[int] = None) -> float:
    table = dp_evaluate(mdp, pi_e, gamma)
    return table.value(mdp.initial_state if state is None else state, 0)
