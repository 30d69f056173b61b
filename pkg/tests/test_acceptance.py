"""Acceptance criteria, one test each; every test records a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""
from functools import lru_cache

import pytest

from drmcts.environments import TicTacToeEnv
from drmcts.estimators import EstimatorConfig
from drmcts.harness import TournamentConfig, run_tournament, run_validation
from drmcts.search import SearchBudget, run_search

from _boards import loss_templates, win_templates, wins_immediately

LINES: list[str] = []
SEED = 42
GAMES = 100


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)


@lru_cache(maxsize=None)
def cell(kind: str, rollouts: int):
    cfg = TournamentConfig(EstimatorConfig(kind=kind), EstimatorConfig(kind="mcts"),
                           rollout_counts=(rollouts,), games_per_setting=GAMES, base_seed=SEED)
    return run_tournament(cfg)[0]


def test_dr_beats_mcts_at_100_rollouts():
    row = cell("dr", 100)
    ok = row.win_rate_a >= 0.60 and row.win_rate_a >= row.win_rate_b + 0.20
    report(1, ok, f"dr vs mcts @100: {row.win_rate_a:.2f} vs {row.win_rate_b:.2f} "
                  f"(draws {row.draws}); need >= 0.60 and a 0.20 margin")
    assert ok


def test_is_beats_mcts_at_80_rollouts():
    row = cell("is", 80)
    ok = row.win_rate_a >= 0.55
    report(2, ok, f"is vs mcts @80: {row.win_rate_a:.2f} vs {row.win_rate_b:.2f} (draws {row.draws}); need >= 0.55")
    assert ok


def test_dr_budget_trend():
    low, high = cell("dr", 20), cell("dr", 100)
    ok = high.win_rate_a >= low.win_rate_a - 0.05
    report(3, ok, f"dr win rate @20 {low.win_rate_a:.2f} -> @100 {high.win_rate_a:.2f}; need drop <= 0.05")
    assert ok


def test_unbiasedness_bench():
    rep = run_validation("unbiasedness", 20_000, 7)
    wanted = [c for c in rep.checks if c.name.startswith("|mean - V_dp| dr")]
    ok = all(c.passed for c in wanted) and len(wanted) >= 3
    gaps = ", ".join(f"{c.name.split('dr ')[1]} {c.measured:.4f}/{c.threshold:.4f}" for c in wanted)
    report(4, ok, f"|mean - V_dp| / 4 SE: {gaps}")
    assert ok


def test_variance_bench():
    rep = run_validation("variance", 20_000, 7)
    by_name = {c.name: c for c in rep.checks}
    base = by_name["Var(hybrid beta=0.5, exact) < Var(MC return)"]
    steps = [by_name["Var(hybrid) eps 0 -> 0.005 non-decreasing"], by_name["Var(hybrid) eps 0.005 -> 0.01 non-decreasing"]]
    ok = base.passed and all(c.passed for c in steps)
    report(5, ok, f"Var hybrid {base.measured:.6f} < MC {base.threshold:.6f}: {base.passed}; "
                  f"Var over eps 0/0.005/0.01 = {steps[0].threshold:.8f}/{steps[0].measured:.8f}/{steps[1].measured:.8f}")
    assert ok


def test_collapse_suite():
    rep = run_validation("collapse", seed=7)
    worst = max(c.measured for c in rep.checks)
    report(6, rep.passed, f"{len(rep.checks)} identities, worst error {worst:.2e} (tol 1e-12)")
    assert rep.passed


@pytest.mark.parametrize("kind", ["mcts", "is", "dr"])
def test_tactical_suite(kind):
    cfg, budget = EstimatorConfig(kind=kind), SearchBudget(100)
    wins = sum(wins_immediately(s, run_search(TicTacToeEnv(), s, cfg, budget, 0).best_action) for s, _ in win_templates())
    blocks = sum(run_search(TicTacToeEnv(), s, cfg, budget, 0).best_action == b for s, b in loss_templates())
    ok = wins >= 7 and blocks >= 7
    report(7, ok, f"{kind}: wins found {wins}/8, blocks found {blocks}/8; need >= 7 each")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
