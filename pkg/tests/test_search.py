import math

import numpy as np
import pytest

from drmcts.environments import FiniteMdp, GameState, MdpEnv, Player, TicTacToeEnv, default_mdp, legal_actions
from drmcts.errors import TerminalRoot
from drmcts.estimators import EstimatorConfig
from drmcts.oracle import dp_value, minimax_player
from drmcts.search import Outcome, SearchBudget, Searcher, move_seed, play_game, run_search, simulate
from drmcts.tree import check_invariants


KINDS = ["mcts", "is", "dr"]


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(0)


def test_simulate_examples():
    env = TicTacToeEnv()
    rng = np.random.default_rng(0)
    state = GameState.from_string("XX.|OOX|OXO")
    ret, t = simulate(env, state, 1.0, 9, rng, Player.X)
    assert ret == 1.0 and t.horizon == 1
    ret, t = simulate(env, GameState(), 1.0, 0, rng)
    assert ret == 0.0 and t.horizon == 0
    done = GameState.from_string("XXX|OO.|...")
    assert simulate(env, done, 1.0, 9, rng, Player.O)[0] == 0.0


def test_simulate_mdp_mean_matches_dp():
    mdp = default_mdp()
    env = MdpEnv(mdp)
    rng = np.random.default_rng(5)
    returns = np.array([simulate(env, env.initial_state(), 1.0, 3 * mdp.horizon, rng)[0] for _ in range(10_000)])
    truth = dp_value(mdp, np.full((4, 2), 0.5))
    assert abs(returns.mean() - truth) <= 4 * returns.std(ddof=1) / math.sqrt(len(returns))


@pytest.mark.parametrize("kind", KINDS)
def test_finds_immediate_win(kind):
    state = GameState.from_string("XX.|OO.|...")
    result = run_search(TicTacToeEnv(), state, EstimatorConfig(kind=kind), SearchBudget(100), seed=0)
    assert result.best_action == 2


@pytest.mark.parametrize("kind", KINDS)
def test_blocks_threat(kind):
    state = GameState.from_string("OO.|X..|X..", to_move=Player.X)
    hits = sum(
        run_search(TicTacToeEnv(), state, EstimatorConfig(kind=kind), SearchBudget(100), seed=s).best_action == 2
        for s in range(5)
    )
    assert hits >= 4


def test_single_iteration_bookkeeping():
    result = run_search(TicTacToeEnv(), GameState(), EstimatorConfig(), SearchBudget(1), seed=0)
    assert result.iterations_run == 1
    assert sum(e.visit_count for e in result.root.edges.values()) == 1


@pytest.mark.parametrize("kind", KINDS)
def test_accounting_and_invariants(kind):
    result = run_search(TicTacToeEnv(), GameState.from_string("X..|.O.|..."), EstimatorConfig(kind=kind),
                        SearchBudget(150), seed=3)
    assert sum(e.visit_count for e in result.root.edges.values()) == 150
    assert check_invariants(result.root) is None
    best_q = max(q for _, q in result.root_q)
    assert result.best_action == min(a for a, q in result.root_q if q == best_q)


@pytest.mark.parametrize("kind", KINDS)
def test_deterministic_under_seed(kind):
    cfg, budget = EstimatorConfig(kind=kind), SearchBudget(60)
    a = run_search(TicTacToeEnv(), GameState(), cfg, budget, seed=9).to_json()
    b = run_search(TicTacToeEnv(), GameState(), cfg, budget, seed=9).to_json()
    assert a == b


def test_dr_with_beta_one_is_plain_mcts():
    for seed in range(5):
        for board in ["...|...|...", "X..|.O.|...", "XO.|.X.|..O"]:
            state = GameState.from_string(board)
            mc = run_search(TicTacToeEnv(), state, EstimatorConfig(kind="mcts"), SearchBudget(80), seed)
            dr = run_search(TicTacToeEnv(), state, EstimatorConfig(kind="dr", beta=1.0), SearchBudget(80), seed)
            assert mc.to_json() == dr.to_json()


def test_terminal_root_rejected():
    with pytest.raises(TerminalRoot):
        run_search(TicTacToeEnv(), GameState.from_string("XXX|OO.|..."), EstimatorConfig(), SearchBudget(5), 0)


@pytest.mark.parametrize("kind", KINDS)
def test_search_on_single_step_mdp(kind):
    mdp = FiniteMdp(np.ones((1, 2, 1)), np.array([[0.2, 0.8]]), horizon=1)
    result = run_search(MdpEnv(mdp), (0, 0), EstimatorConfig(kind=kind, rho_clip=None), SearchBudget(20), seed=1)
    assert result.best_action == 1


def first_legal(state, seed):
    return legal_actions(state)[0]


def test_games_against_scripted_players():
    assert play_game(minimax_player, minimax_player, seed=0).outcome is Outcome.DRAW
    assert play_game(first_legal, minimax_player, seed=0).outcome is Outcome.O_WINS
    assert play_game(minimax_player, first_legal, seed=0).outcome is Outcome.X_WINS


def test_game_replay_is_identical():
    player = Searcher(EstimatorConfig(kind="dr"), SearchBudget(30))
    a = play_game(player, player, seed=12)
    b = play_game(player, player, seed=12)
    assert a == b and len(a.moves) >= 5


def test_move_seeds_differ_by_ply():
    assert len({move_seed(3, p) for p in range(9)}) == 9
