"""Command line entry point: ``drmcts tournament``, ``drmcts validate``, ``drmcts search``."""
from __future__ import annotations

import argparse
import logging
import sys

from .environments import GameState, TicTacToeEnv
from .errors import DrMctsError
from .estimators import EstimatorConfig
from .harness import SUITES, build_config, load_config_file, parse_rollouts, run_tournament, run_validation
from .search import SearchBudget, run_search
from .tree import dump_root

log = logging.getLogger("drmcts")

# flag dest -> TournamentConfig / estimator key
_FLAG_KEYS = {
    "algo_a": "algo_a", "algo_b": "algo_b", "rollouts": "rollout_counts", "games": "games_per_setting",
    "beta": "beta", "tau": "tau", "c": "c", "lam": "lam", "kfolds": "k_folds", "rho_clip": "rho_clip",
    "seed": "base_seed", "out": "output_path",
}
_DEFAULTS = {
    "algo_a": "dr", "algo_b": "mcts", "rollout_counts": (20, 40, 60, 80, 100), "games_per_setting": 100,
    "base_seed": 42, "output_path": "results.csv",
}


def _rho(text: str):
    return None if text.lower() == "none" else float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="drmcts", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("tournament", help="play seeded matches across rollout budgets")
    kinds = ("mcts", "is", "dr")
    t.add_argument("--config", help="INI file with a [tournament] section")
    t.add_argument("--algo-a", choices=kinds)
    t.add_argument("--algo-b", choices=kinds)
    t.add_argument("--rollouts", type=parse_rollouts, help="comma separated, e.g. 20,40,60,80,100")
    t.add_argument("--games", type=int)
    t.add_argument("--beta", type=float)
    t.add_argument("--tau", type=float)
    t.add_argument("--c", type=float)
    t.add_argument("--lambda", dest="lam", type=float)
    t.add_argument("--kfolds", type=int)
    t.add_argument("--rho-clip", type=_rho, help="ratio cap, or 'none'")
    t.add_argument("--seed", type=int)
    t.add_argument("--out")
    t.add_argument("--workers", type=int, default=1)

    v = sub.add_parser("validate", help="run an estimator validation suite")
    v.add_argument("--suite", choices=SUITES + ("all",), required=True)
    v.add_argument("--samples", type=int, default=20000)
    v.add_argument("--seed", type=int, default=7)

    s = sub.add_parser("search", help="search one Tic-Tac-Toe position and print root statistics")
    s.add_argument("board", help="rows separated by '|', e.g. 'XX.|OO.|...'")
    s.add_argument("--kind", choices=kinds, default="dr")
    s.add_argument("--iterations", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    return parser


def _tournament(args) -> int:
    settings = dict(_DEFAULTS)
    if args.config:
        settings.update(load_config_file(args.config))
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest)
        if value is not None:
            settings[key] = value
    config = build_config(settings)
    print(",".join(("rollouts", "algo_a", "algo_b", "wins_a", "wins_b", "draws")))
    rows = run_tournament(
        config, workers=args.workers,
        progress=lambda r: print(f"{r.rollouts},{r.algo_a},{r.algo_b},{r.wins_a},{r.wins_b},{r.draws}", flush=True),
    )
    log.info("wrote %d rows to %s", len(rows), config.output_path)
    return 0


def _validate(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    ok = True
    for name in suites:
        report = run_validation(name, args.samples, args.seed)
        print(report.to_json())
        ok &= report.passed
    return 0 if ok else 1


def _search(args) -> int:
    state = GameState.from_string(args.board)
    config = EstimatorConfig(kind=args.kind)
    result = run_search(TicTacToeEnv(config.lam), state, config, SearchBudget(args.iterations), args.seed)
    print(dump_root(result.root))
    print(result.to_json())
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"tournament": _tournament, "validate": _validate, "search": _search}
    try:
        return handlers[args.command](args)
    except (DrMctsError, ValueError, OSError) as exc:
        print(f"drmcts: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
