"""Search-tree bookkeeping: edge statistics, PUCT selection, backpropagation."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import NoLegalAction
from .policies import PolicyDistribution


@dataclass
class EdgeStats:
    visit_count: int = 0
    total_value: float = 0.0
    reward_samples: list = field(default_factory=list)

    @property
    def q(self) -> float:
        if self.visit_count == 0:
            raise ValueError("Q is undefined for an unvisited edge")
        return self.total_value / self.visit_count

    def record(self, value: float) -> None:
        self.visit_count += 1
        self.total_value += value
        self.reward_samples.append(value)


@dataclass(eq=False)
class TreeNode:
    """One history in the tree.

    ``player`` is the side to move (``None`` for single-agent problems); all
    edge values are stored from that player's point of view.
    """

    key: tuple
    legal: tuple
    player: object = None
    state: object = None
    visit_count: int = 0
    edges: dict = field(default_factory=dict)
    children: dict = field(default_factory=dict)

    def edge(self, action: int) -> EdgeStats:
        stats = self.edges.get(action)
        if stats is None:
            stats = self.edges[action] = EdgeStats()
        return stats

    def q(self, action: int) -> float:
        stats = self.edges.get(action)
        return stats.q if stats is not None and stats.visit_count else 0.0

    def child(self, action: int, legal: Sequence[int], player=None, state=None) -> "TreeNode":
        node = self.children.get(action)
        if node is None:
            node = TreeNode(self.key + (action,), tuple(legal), player, state)
            self.children[action] = node
        return node


def puct_scores(node: TreeNode, behavior: PolicyDistribution, c: float) -> list[float]:
    sqrt_n = math.sqrt(node.visit_count)
    prior = behavior.as_dict()
    scores = []
    for a in node.legal:
        stats = node.edges.get(a)
        n_a = stats.visit_count if stats is not None else 0
        q = stats.total_value / n_a if n_a else 0.0
        scores.append(q + c * prior.get(a, 0.0) * sqrt_n / (1 + n_a))
    return scores


def puct_select(node: TreeNode, behavior: PolicyDistribution, c: float) -> int:
    """argmax of Q + c * prior * sqrt(N) / (1 + N_a); ties go to the lowest action."""
    if not node.legal:
        raise NoLegalAction(f"node {node.key} has no legal action")
    scores = puct_scores(node, behavior, c)
    best = max(scores)
    return min(a for a, s in zip(node.legal, scores) if s == best)


def record_and_backpropagate(path: Sequence[tuple[TreeNode, int]], value, perspective=None) -> None:
    """Add ``value`` to every edge on ``path``.

    ``value`` is either one number for the whole path or one per edge, in
    ``perspective``'s frame; nodes whose mover differs get ``1 - value``.
    With ``perspective=None`` values are used unchanged.
    """
    values = [value] * len(path) if isinstance(value, (int, float)) else list(value)
    if len(values) != len(path):
        raise ValueError("need one value per edge")
    for (node, action), v in zip(path, values):
        if perspective is not None and node.player is not None and node.player != perspective:
            v = 1.0 - v
        node.edge(action).record(v)
        node.visit_count += 1


def q_table(node: TreeNode) -> list[tuple[int, float]]:
    return [(a, node.q(a)) for a in node.legal]


def dump_root(node: TreeNode) -> str:
    """Root children as JSON lines of ``{"action", "N", "Q"}`` for logs."""
    rows = []
    for a in node.legal:
        stats = node.edges.get(a)
        n = stats.visit_count if stats else 0
        rows.append(json.dumps({"action": a, "N": n, "Q": round(node.q(a), 6)}))
    return "\n".join(rows)


def check_invariants(node: TreeNode, tol: float = 1e-9) -> Optional[str]:
    """Return a description of the first broken invariant below ``node``, else None."""
    stack = [node]
    while stack:
        cur = stack.pop()
        total = sum(e.visit_count for e in cur.edges.values())
        if total != cur.visit_count:
            return f"N(h)={cur.visit_count} but sum N(h,a)={total} at {cur.key}"
        for a, e in cur.edges.items():
            if a not in cur.legal:
                return f"edge {a} not legal at {cur.key}"
            if e.visit_count != len(e.reward_samples):
                return f"N(h,a) != #samples at {cur.key}+{a}"
            if e.visit_count and abs(e.q - math.fsum(e.reward_samples) / e.visit_count) > tol:
                return f"Q != mean(samples) at {cur.key}+{a}"
        for a in cur.children:
            if a not in cur.edges:
                return f"child {a} has no edge at {cur.key}"
        stack.extend(cur.children.values())
    return None
