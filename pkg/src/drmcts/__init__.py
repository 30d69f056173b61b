"""Doubly robust Monte Carlo tree search with MCTS and IS-MCTS baselines."""
from .environments import FiniteMdp, GameState, MdpEnv, Player, TicTacToeEnv, default_mdp
from .estimators import EstimatorConfig, EstimatorKind, Trajectory, TrajectoryStep
from .search import SearchBudget, SearchResult, Searcher, play_game, run_search

__all__ = [
    "EstimatorConfig", "EstimatorKind", "FiniteMdp", "GameState", "MdpEnv", "Player",
    "SearchBudget", "SearchResult", "Searcher", "TicTacToeEnv", "Trajectory", "TrajectoryStep",
    "default_mdp", "play_game", "run_search",
]
__version__ = "0.1.0"
