"""Tic-Tac-Toe and a small enumerable finite-horizon MDP.

Both environments expose the same duck-typed surface consumed by the search
module (see :class:`TicTacToeEnv` and :class:`MdpEnv`).  States are immutable
values; any randomness is drawn from an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

import configparser
import enum
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import IllegalMove, IndexOutOfRange
from .policies import PolicyDistribution, heuristic_distribution, mix_with_uniform


class Player(enum.IntEnum):
    X = 1
    O = 2  # noqa: E741

    @property
    def other(self) -> "Player":
        return Player.O if self is Player.X else Player.X


EMPTY = 0
_SYMBOLS = {EMPTY: ".", Player.X: "X", Player.O: "O"}
LINES = tuple(tuple(int(c) for c in line) for line in kernels.LINES)


@dataclass(frozen=True)
class GameState:
    """A Tic-Tac-Toe position: nine cells (0 empty, 1 X, 2 O) and the mover."""

    cells: tuple = (EMPTY,) * 9
    to_move: Player = Player.X

    def __post_init__(self):
        if len(self.cells) != 9:
            raise ValueError("a board has exactly 9 cells")
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        object.__setattr__(self, "to_move", Player(self.to_move))

    @classmethod
    def from_string(cls, text: str, to_move: Optional[Player] = None) -> "GameState":
        """Parse boards like ``"XX.|OO.|..."``; ``.``, ``-`` and ``_`` mark empty cells.

        When ``to_move`` is omitted it is inferred from the piece counts.
        """
        chars = [ch for ch in text.upper() if ch in "XO.-_"]
        if len(chars) != 9:
            raise ValueError(f"expected 9 cells, got {len(chars)} in {text!r}")
        lookup = {"X": Player.X, "O": Player.O}
        cells = tuple(lookup.get(ch, EMPTY) for ch in chars)
        if to_move is None:
            to_move = Player.X if cells.count(Player.X) == cells.count(Player.O) else Player.O
        return cls(cells, to_move)

    def render(self) -> str:
        rows = ("|".join(_SYMBOLS[c] for c in self.cells[r * 3:r * 3 + 3]) for r in range(3))
        return "\n".join(rows)

    def __str__(self) -> str:
        return self.render()

    def as_array(self) -> np.ndarray:
        return np.array(self.cells, dtype=np.int8)


def winner(state: GameState) -> Optional[Player]:
    return _winner(state.cells)


@lru_cache(maxsize=None)
def _winner(cells: tuple) -> Optional[Player]:
    for a, b, c in LINES:
        if cells[a] != EMPTY and cells[a] == cells[b] == cells[c]:
            return Player(cells[a])
    return None


def is_terminal(state: GameState) -> bool:
    return _winner(state.cells) is not None or EMPTY not in state.cells


def legal_actions(state: GameState) -> list[int]:
    """Empty cells in ascending order; nothing once a line has been completed."""
    if _winner(state.cells) is not None:
        return []
    return [i for i, c in enumerate(state.cells) if c == EMPTY]


def apply(state: GameState, action: int) -> GameState:
    if not 0 <= action < 9 or state.cells[action] != EMPTY:
        raise IllegalMove(f"cell {action} is not available")
    if _winner(state.cells) is not None:
        raise IllegalMove("the game is already decided")
    cells = list(state.cells)
    cells[action] = state.to_move
    return GameState(tuple(cells), state.to_move.other)


def terminal_value(state: GameState, perspective: Player) -> Optional[float]:
    """1.0 win / 0.0 loss / 0.5 draw for ``perspective``; ``None`` while in play."""
    w = _winner(state.cells)
    if w is not None:
        return 1.0 if w == perspective else 0.0
    if EMPTY not in state.cells:
        return 0.5
    return None


class TicTacToeEnv:
    """Search adapter for Tic-Tac-Toe.

    ``behavior`` is the heuristic rollout policy smoothed towards uniform with
    weight ``lam`` so that every legal move has probability at least lam/|A|.
    """

    two_player = True

    def __init__(self, lam: float = 0.1):
        self.lam = lam

    def legal_actions(self, state: GameState) -> list[int]:
        return legal_actions(state)

    def is_terminal(self, state: GameState) -> bool:
        return is_terminal(state)

    def player(self, state: GameState) -> Player:
        return state.to_move

    def next_state(self, state: GameState, action: int, rng=None) -> GameState:
        return apply(state, action)

    def reward(self, state: GameState, action: int, nxt: GameState, perspective) -> float:
        v = terminal_value(nxt, perspective)
        return 0.0 if v is None else v

    def terminal_value(self, state: GameState, perspective) -> Optional[float]:
        return terminal_value(state, perspective)

    def behavior(self, state: GameState) -> PolicyDistribution:
        return _smoothed_heuristic(state.cells, self.lam)

    def rollout(self, state: GameState, perspective, gamma: float, max_depth: int, rng: np.random.Generator):
        """Kernel-backed rollout; returns (return, actions, behavior probs, rewards)."""
        uniforms = rng.random(9)
        ret, steps, actions, probs, rewards = kernels.ACTIVE.rollout(
            state.as_array(), int(state.to_move), int(perspective), float(self.lam),
            float(gamma), int(max_depth), uniforms,
        )
        return float(ret), actions[:steps].tolist(), probs[:steps].tolist(), rewards[:steps].tolist()


@lru_cache(maxsize=65536)
def _smoothed_heuristic(cells: tuple, lam: float) -> PolicyDistribution:
    return mix_with_uniform(heuristic_distribution(GameState(cells, Player.X)), lam)


# --------------------------------------------------------------------- MDP


@dataclass(frozen=True, eq=False)
class FiniteMdp:
    """Finite-horizon MDP with tabular dynamics.

    ``transition[s, a]`` is a distribution over next states and
    ``reward[s, a]`` the deterministic reward for taking ``a`` in ``s``.
    """

    transition: np.ndarray
    reward: np.ndarray
    horizon: int
    initial_state: int = 0

    def __post_init__(self):
        p = np.array(self.transition, dtype=np.float64)
        r = np.array(self.reward, dtype=np.float64)
        if p.ndim != 3 or p.shape[0] != p.shape[2] or p.shape[:2] != r.shape:
            raise ValueError(f"inconsistent table shapes {p.shape} and {r.shape}")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("transition probabilities must lie in [0, 1]")
        if np.max(np.abs(p.sum(axis=2) - 1.0)) > 1e-12:
            raise ValueError("each transition row must sum to 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not 0 <= self.initial_state < p.shape[0]:
            raise ValueError("initial_state out of range")
        p.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "reward", r)

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]


def mdp_step(mdp: FiniteMdp, s: int, a: int, rng: np.random.Generator) -> tuple[int, float]:
    if not (0 <= s < mdp.n_states and 0 <= a < mdp.n_actions):
        raise IndexOutOfRange(f"(state={s}, action={a}) outside {mdp.n_states}x{mdp.n_actions}")
    row = mdp.transition[s, a]
    nxt = int(np.searchsorted(np.cumsum(row), rng.random(), side="right"))
    return min(nxt, mdp.n_states - 1), float(mdp.reward[s, a])


def default_mdp(seed: int = 0) -> FiniteMdp:
    """4 states, 2 actions, horizon 3, seeded Dirichlet transitions and U[0,1) rewards."""
    rng = np.random.default_rng(seed)
    transition = rng.dirichlet(np.ones(4), size=(4, 2))
    transition /= transition.sum(axis=2, keepdims=True)
    reward = rng.random((4, 2))
    return FiniteMdp(transition, reward, horizon=3, initial_state=0)


def save_mdp(mdp: FiniteMdp, path) -> None:
    """Write the key-value text format read by :func:`load_mdp`.

    ::

        [mdp]
        n_states = 4
        n_actions = 2
        horizon = 3
        initial_state = 0
        transition = <n_states*n_actions*n_states floats, row-major>
        reward = <n_states*n_actions floats, row-major>
    """
    cfg = configparser.ConfigParser()
    cfg["mdp"] = {
        "n_states": str(mdp.n_states),
        "n_actions": str(mdp.n_actions),
        "horizon": str(mdp.horizon),
        "initial_state": str(mdp.initial_state),
        "transition": " ".join(repr(float(x)) for x in mdp.transition.ravel()),
        "reward": " ".join(repr(float(x)) for x in mdp.reward.ravel()),
    }
    with open(path, "w") as fh:
        cfg.write(fh)


def load_mdp(path) -> FiniteMdp:
    cfg = configparser.ConfigParser()
    if not cfg.read(Path(path)):
        raise FileNotFoundError(path)
    sec = cfg["mdp"]
    n_s, n_a = sec.getint("n_states"), sec.getint("n_actions")
    transition = np.array(sec["transition"].split(), dtype=np.float64).reshape(n_s, n_a, n_s)
    reward = np.array(sec["reward"].split(), dtype=np.float64).reshape(n_s, n_a)
    return FiniteMdp(transition, reward, sec.getint("horizon"), sec.getint("initial_state", 0))


class MdpEnv:
    """Search adapter for :class:`FiniteMdp`; a state is ``(s, t)`` and is terminal at ``t == H``.

    ``policy`` is an ``(n_states, n_actions)`` behavior table, uniform by default.
    """

    two_player = False

    def __init__(self, mdp: FiniteMdp, policy: Optional[Sequence] = None):
        self.mdp = mdp
        if policy is None:
            policy = np.full((mdp.n_states, mdp.n_actions), 1.0 / mdp.n_actions)
        self.policy = np.asarray(policy, dtype=np.float64)
        actions = tuple(range(mdp.n_actions))
        self._dists = [PolicyDistribution(actions, tuple(row)) for row in self.policy]

    def initial_state(self) -> tuple[int, int]:
        return (self.mdp.initial_state, 0)

    def legal_actions(self, state) -> list[int]:
        return [] if self.is_terminal(state) else list(range(self.mdp.n_actions))

    def is_terminal(self, state) -> bool:
        return state[1] >= self.mdp.horizon

    def player(self, state):
        return None

    def next_state(self, state, action: int, rng: np.random.Generator):
        s, t = state
        nxt, _ = mdp_step(self.mdp, s, action, rng)
        return (nxt, t + 1)

    def reward(self, state, action: int, nxt, perspective) -> float:
        return float(self.mdp.reward[state[0], action])

    def terminal_value(self, state, perspective) -> Optional[float]:
        return 0.0 if self.is_terminal(state) else None

    def behavior(self, state) -> PolicyDistribution:
        return self._dists[state[0]]
