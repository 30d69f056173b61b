"""Tree search with pluggable value estimators (plain MCTS, step-wise IS, DR hybrid).

One iteration: PUCT selection down the tree, expansion of the first history
not yet in the tree, a rollout with the behavior policy, an estimate of the
backed-up value, and backpropagation along the selected path.

For the IS and DR estimators every edge ``(h_j, a_j)`` on the selected path
gets its own value ``r_j + gamma * V(h_{j+1})``, where ``V(h_{j+1})`` is the
estimate over the remaining trajectory: the in-tree steps below ``h_j`` carry
target-policy probabilities (softmax over the node's Q-values), behavior
probabilities and the node's value-model estimates; the rollout steps follow
and are on-policy (ratio 1, zero value model).  The edge above the new leaf
therefore always receives the plain rollout return.  All values are expressed
from the root mover's point of view and flipped per node during
backpropagation.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .environments import GameState, Player, TicTacToeEnv, apply, is_terminal, terminal_value
from .errors import TerminalRoot
from .estimators import (
    EstimatorConfig,
    EstimatorKind,
    Trajectory,
    TrajectoryStep,
    q_hat_kfold,
    v_dr,
    v_hybrid,
    v_step_is,
)
from .tree import TreeNode, puct_select, q_table, record_and_backpropagate


@dataclass(frozen=True)
class SearchBudget:
    iterations: int
    max_rollout_depth: int = 9

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.max_rollout_depth < 0:
            raise ValueError("max_rollout_depth must be >= 0")


@dataclass
class SearchResult:
    best_action: int
    root_q: list
    iterations_run: int
    root: Optional[TreeNode] = field(default=None, repr=False, compare=False)

    def to_json(self) -> str:
        payload = {
            "best_action": self.best_action,
            "root_q": [[a, q] for a, q in self.root_q],
            "iterations_run": self.iterations_run,
        }
        return json.dumps(payload, sort_keys=True)


def simulate(env, state, gamma: float, max_depth: int, rng: np.random.Generator, perspective=None):
    """Roll out the behavior policy from ``state``.

    Returns ``(discounted return, Trajectory)``; every step is recorded with
    ``pi_e == pi_b`` (the rollout is on-policy) and a zero value model.  The
    return is 0 when the depth cap cuts the rollout short.
    """
    if perspective is None:
        perspective = env.player(state)
    if env.is_terminal(state):
        v = env.terminal_value(state, perspective)
        return (0.0 if v is None else v), Trajectory()
    if max_depth <= 0:
        return 0.0, Trajectory()
    if hasattr(env, "rollout"):
        ret, _, probs, rewards = env.rollout(state, perspective, gamma, max_depth, rng)
        steps = [TrajectoryStep(r, p, p) for p, r in zip(probs, rewards)]
        return ret, Trajectory(steps)
    steps = []
    ret, disc = 0.0, 1.0
    for _ in range(max_depth):
        if env.is_terminal(state):
            break
        dist = env.behavior(state)
        a = dist.sample(rng)
        p = dist.prob(a)
        nxt = env.next_state(state, a, rng)
        r = env.reward(state, a, nxt, perspective)
        steps.append(TrajectoryStep(r, p, p))
        ret += disc * r
        disc *= gamma
        state = nxt
    return ret, Trajectory(steps)


def _node_model(node: TreeNode, action: int, tau: float, k_folds: int):
    """(pi_e(action), V-hat, Q-hat(action)) at ``node`` in the node mover's frame."""
    qs = [node.q(a) for a in node.legal]
    top = max(qs)
    weights = [math.exp((q - top) / tau) for q in qs]
    z = math.fsum(weights)
    probs = [w / z for w in weights]
    v_hat = math.fsum(p * q for p, q in zip(probs, qs))
    stats = node.edges.get(action)
    q_hat = q_hat_kfold(stats.reward_samples, k_folds) if stats is not None else 0.0
    return probs[node.legal.index(action)], v_hat, q_hat


def _path_steps(env, path, states, rewards, config: EstimatorConfig, perspective):
    """One TrajectoryStep per in-tree step, in the root mover's frame, plus V-hat per node.

    Steps at nodes without statistics (``N(h) == 0``) are treated like rollout
    steps: ratio 1 and a zero value model.
    """
    steps, v_hats = [], []
    for (node, a), state, r in zip(path, states, rewards):
        if node.visit_count == 0:
            steps.append((r, 1.0, 1.0, 0.0))
            v_hats.append(0.0)
            continue
        pi_e, v_hat, q_hat = _node_model(node, a, config.tau, config.k_folds)
        pi_b = env.behavior(state).prob(a)
        if perspective is not None and node.player is not None and node.player != perspective:
            v_hat, q_hat = 1.0 - v_hat, 1.0 - q_hat
        steps.append((r, pi_e, pi_b, q_hat))
        v_hats.append(v_hat)
    v_hats.append(0.0)  # the freshly expanded leaf has no statistics yet
    out = [
        TrajectoryStep(r, pe, pb, v_hats[j + 1], qh, key=path[j][0].key + (path[j][1],))
        for j, (r, pe, pb, qh) in enumerate(steps)
    ]
    return out, v_hats


def _edge_values(kind, steps, v_hats, rewards, rollout: Trajectory, g: float, config: EstimatorConfig):
    """Backed-up value for each edge on the path, root edge first."""
    gamma = config.gamma
    values = []
    for j in range(len(steps)):
        tail = Trajectory(steps[j + 1:] + rollout.steps, v_hat_root=v_hats[j + 1])
        later = math.fsum(gamma ** t * r for t, r in enumerate(rewards[j + 1:]))
        v_mc = rewards[j] + gamma * (later + gamma ** (len(rewards) - j - 1) * g)
        if kind is EstimatorKind.STEP_IS:
            values.append(rewards[j] + gamma * v_step_is(tail, gamma, config.rho_clip))
        else:
            v_dr_val = rewards[j] + gamma * v_dr(tail, gamma, config.rho_clip)
            values.append(v_hybrid(v_mc, v_dr_val, config.beta))
    return values


def run_search(env, root_state, config: EstimatorConfig, budget: SearchBudget, seed: int) -> SearchResult:
    """Run ``budget.iterations`` iterations and return the argmax-Q root action.

    Plain MCTS and terminal leaves back up one value along the whole path,
    which is exact for games whose only reward arrives at the end
    (Tic-Tac-Toe); IS and DR back up one value per edge.
    """
    if env.is_terminal(root_state):
        raise TerminalRoot("cannot search from a finished position")
    rng = np.random.default_rng(seed)
    perspective = env.player(root_state)
    root = TreeNode((), tuple(env.legal_actions(root_state)), perspective, root_state)
    gamma = config.gamma
    for _ in range(budget.iterations):
        node, state = root, root_state
        path, states, rewards = [], [], []
        leaf = None
        while True:
            a = puct_select(node, env.behavior(state), config.c)
            nxt = env.next_state(state, a, rng)
            path.append((node, a))
            states.append(state)
            rewards.append(env.reward(state, a, nxt, perspective))
            state = nxt
            if env.is_terminal(state):
                break
            child = node.children.get(a)
            if child is None:
                leaf = node.child(a, env.legal_actions(state), env.player(state), state)
                break
            node = child

        path_return = math.fsum(gamma ** t * r for t, r in enumerate(rewards))
        if leaf is None:
            # the final transition's reward is the terminal outcome
            value = path_return
        else:
            g, rollout = simulate(env, state, gamma, budget.max_rollout_depth, rng, perspective)
            if config.kind is EstimatorKind.MCTS:
                value = path_return + gamma ** len(rewards) * g
            else:
                steps, v_hats = _path_steps(env, path, states, rewards, config, perspective)
                value = _edge_values(config.kind, steps, v_hats, rewards, rollout, g, config)
        record_and_backpropagate(path, value, perspective)

    root_q = q_table(root)
    best_q = max(q for _, q in root_q)
    best = min(a for a, q in root_q if q == best_q)
    return SearchResult(best, root_q, budget.iterations, root)


# ------------------------------------------------------------------- games


@dataclass(frozen=True)
class Searcher:
    """A configured Tic-Tac-Toe player: ``searcher(state, seed) -> action``."""

    config: EstimatorConfig
    budget: SearchBudget

    @property
    def name(self) -> str:
        return self.config.kind.value

    def __call__(self, state: GameState, seed: int) -> int:
        env = TicTacToeEnv(self.config.lam)
        return run_search(env, state, self.config, self.budget, seed).best_action


class Outcome(str, enum.Enum):
    X_WINS = "x"
    O_WINS = "o"
    DRAW = "draw"


@dataclass(frozen=True)
class GameRecord:
    outcome: Outcome
    moves: tuple


def move_seed(seed: int, ply: int) -> int:
    return int(np.random.SeedSequence([seed, ply]).generate_state(1, np.uint64)[0] >> np.uint64(1))


def play_game(player_x: Callable, player_o: Callable, seed: int, start: Optional[GameState] = None) -> GameRecord:
    """Alternate the two players from ``start`` (empty board by default) until the game ends."""
    state = start or GameState()
    moves = []
    ply = 0
    while not is_terminal(state):
        player = player_x if state.to_move is Player.X else player_o
        a = int(player(state, move_seed(seed, ply)))
        state = apply(state, a)
        moves.append(a)
        ply += 1
    v = terminal_value(state, Player.X)
    outcome = Outcome.X_WINS if v == 1.0 else Outcome.O_WINS if v == 0.0 else Outcome.DRAW
    return GameRecord(outcome, tuple(moves))
