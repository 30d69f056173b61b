"""Experiment orchestration: seeded tournaments, validation suites, result files."""
from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import UnknownSuite
from .estimators import (
    EstimatorConfig,
    EstimatorKind,
    Trajectory,
    TrajectoryStep,
    discounted_return,
    q_hat_kfold,
    v_dr,
    v_hybrid,
    v_is,
    v_step_is,
)
from .oracle import default_bench, dp_value, measure_estimator
from .policies import softmax
from .search import Outcome, SearchBudget, Searcher, play_game

TABLE_ROLLOUTS = (20, 40, 60, 80, 100)
CSV_HEADER = ("rollouts", "algo_a", "algo_b", "wins_a", "wins_b", "draws", "win_rate_a", "win_rate_b", "seed")
SUITES = ("unbiasedness", "variance", "collapse")


@dataclass(frozen=True)
class TournamentConfig:
    algo_a: EstimatorConfig
    algo_b: EstimatorConfig
    rollout_counts: tuple = TABLE_ROLLOUTS
    games_per_setting: int = 100
    base_seed: int = 42
    output_path: Optional[Path] = None
    max_rollout_depth: int = 9

    def __post_init__(self):
        counts = tuple(int(r) for r in self.rollout_counts)
        object.__setattr__(self, "rollout_counts", counts)
        if self.output_path is not None:
            object.__setattr__(self, "output_path", Path(self.output_path))
        if not counts or min(counts) < 1:
            raise ValueError("rollout_counts must be non-empty and all >= 1")
        if self.games_per_setting < 1:
            raise ValueError("games_per_setting must be >= 1")

    def to_dict(self) -> dict:
        return {
            "algo_a": self.algo_a.to_dict(),
            "algo_b": self.algo_b.to_dict(),
            "rollout_counts": list(self.rollout_counts),
            "games_per_setting": self.games_per_setting,
            "base_seed": self.base_seed,
            "max_rollout_depth": self.max_rollout_depth,
        }


@dataclass(frozen=True)
class TournamentRow:
    rollouts: int
    algo_a: str
    algo_b: str
    wins_a: int
    wins_b: int
    draws: int
    base_seed: int

    @property
    def games(self) -> int:
        return self.wins_a + self.wins_b + self.draws

    @property
    def win_rate_a(self) -> float:
        return self.wins_a / self.games

    @property
    def win_rate_b(self) -> float:
        return self.wins_b / self.games

    def csv_fields(self) -> list[str]:
        return [
            str(self.rollouts), self.algo_a, self.algo_b, str(self.wins_a), str(self.wins_b),
            str(self.draws), f"{self.win_rate_a:.4f}", f"{self.win_rate_b:.4f}", str(self.base_seed),
        ]


def game_seed(base_seed: int, rollouts: int, index: int) -> int:
    """``base_seed`` XOR a stable 63-bit hash of ``(rollouts, index)``."""
    digest = hashlib.blake2b(f"{rollouts}:{index}".encode(), digest_size=8).digest()
    return (base_seed ^ int.from_bytes(digest, "little")) & ((1 << 63) - 1)


def _play_one(args) -> tuple[int, str]:
    config, rollouts, index = args
    budget = SearchBudget(rollouts, config.max_rollout_depth)
    a = Searcher(config.algo_a, budget)
    b = Searcher(config.algo_b, budget)
    a_is_x = index % 2 == 0
    record = play_game(a if a_is_x else b, b if a_is_x else a, game_seed(config.base_seed, rollouts, index))
    if record.outcome is Outcome.DRAW:
        return index, "draw"
    x_won = record.outcome is Outcome.X_WINS
    return index, "a" if x_won == a_is_x else "b"


def run_setting(config: TournamentConfig, rollouts: int, pool=None) -> TournamentRow:
    tasks = [(config, rollouts, i) for i in range(config.games_per_setting)]
    results = pool.map(_play_one, tasks) if pool is not None else map(_play_one, tasks)
    tally = {"a": 0, "b": 0, "draw": 0}
    for _, who in results:
        tally[who] += 1
    return TournamentRow(
        rollouts, config.algo_a.kind.value, config.algo_b.kind.value,
        tally["a"], tally["b"], tally["draw"], config.base_seed,
    )


def run_tournament(
    config: TournamentConfig,
    workers: int = 1,
    progress: Optional[Callable[[TournamentRow], None]] = None,
) -> list[TournamentRow]:
    """Play every rollout setting in order; rows are appended to the output as each finishes."""
    rows = []
    if config.output_path is not None:
        write_results(rows, config.output_path, config)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for rollouts in config.rollout_counts:
            row = run_setting(config, rollouts, pool)
            rows.append(row)
            if config.output_path is not None:
                write_results(rows, config.output_path, config)
            if progress is not None:
                progress(row)
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def results_csv(rows: Sequence[TournamentRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def write_results(rows: Sequence[TournamentRow], path, config: Optional[TournamentConfig] = None) -> None:
    """CSV at ``path`` plus a ``.json`` sidecar with the config and rows."""
    path = Path(path)
    path.write_text(results_csv(rows))
    meta = {
        "config": config.to_dict() if config is not None else None,
        "rows": [dict(zip(CSV_HEADER, row.csv_fields())) for row in rows],
    }
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------- config


def _opt_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


_ESTIMATOR_KEYS = {
    "beta": float, "tau": float, "gamma": float, "c": float,
    "k_folds": int, "lam": float, "rho_clip": _opt_float,
}


def parse_rollouts(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def load_config_file(path) -> dict:
    """Flat dict of overrides from the ``[tournament]`` section of an INI file."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if not parser.has_section("tournament"):
        raise ValueError(f"{path}: missing [tournament] section")
    sec = parser["tournament"]
    out = {}
    for key, value in sec.items():
        if key in ("algo_a", "algo_b"):
            out[key] = EstimatorKind(value.strip()).value
        elif key == "rollout_counts":
            out[key] = parse_rollouts(value)
        elif key in ("games_per_setting", "base_seed", "max_rollout_depth"):
            out[key] = int(value)
        elif key == "output_path":
            out[key] = value.strip()
        elif key in _ESTIMATOR_KEYS:
            out[key] = _ESTIMATOR_KEYS[key](value)
        else:
            raise ValueError(f"{path}: unknown key {key!r}")
    return out


def build_config(settings: dict) -> TournamentConfig:
    """TournamentConfig from flat settings; shared estimator keys apply to both players."""
    shared = {k: settings[k] for k in _ESTIMATOR_KEYS if k in settings}
    algo_a = EstimatorConfig(kind=settings.get("algo_a", "dr"), **shared)
    algo_b = EstimatorConfig(kind=settings.get("algo_b", "mcts"), **shared)
    kwargs = {k: settings[k] for k in ("rollout_counts", "games_per_setting", "base_seed", "output_path", "max_rollout_depth")
              if k in settings}
    return TournamentConfig(algo_a, algo_b, **kwargs)


# ------------------------------------------------------------- validation


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "measured": self.measured, "threshold": self.threshold, "passed": self.passed}


@dataclass
class ValidationReport:
    suite: str
    n_samples: int
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, measured: float, threshold: float, passed: bool) -> None:
        self.checks.append(Check(name, float(measured), float(threshold), bool(passed)))

    def to_json(self) -> str:
        return json.dumps({
            "suite": self.suite, "n_samples": self.n_samples, "seed": self.seed,
            "passed": self.passed, "checks": [c.to_dict() for c in self.checks],
        }, indent=2)


def _unbiasedness(report: ValidationReport) -> None:
    mdp, pi_e, pi_b = default_bench()
    truth = dp_value(mdp, pi_e)
    cases = [
        ("step-is", EstimatorConfig(kind="is", rho_clip=None), "exact", 0.0),
        ("dr exact", EstimatorConfig(kind="dr", beta=0.0, rho_clip=None), "exact", 0.0),
        ("dr noise eps=0.01", EstimatorConfig(kind="dr", beta=0.0, rho_clip=None), "noise", 0.01),
        ("dr zero model", EstimatorConfig(kind="dr", beta=0.0, rho_clip=None), "zero", 0.0),
        ("hybrid beta=0.5 exact", EstimatorConfig(kind="dr", beta=0.5, rho_clip=None), "exact", 0.0),
    ]
    for name, cfg, q_model, eps in cases:
        stats = measure_estimator(mdp, pi_e, pi_b, cfg, report.n_samples, report.seed, q_model, eps)
        gap = abs(stats.mean - truth)
        report.add(f"|mean - V_dp| {name}", gap, 4 * stats.std_error, gap <= 4 * stats.std_error)


def _variance(report: ValidationReport) -> None:
    mdp, pi_e, pi_b = default_bench()
    args = (mdp, pi_e, pi_b)
    mc = measure_estimator(*args, EstimatorConfig(kind="mcts", rho_clip=None), report.n_samples, report.seed)
    dr = measure_estimator(*args, EstimatorConfig(kind="dr", beta=0.0, rho_clip=None), report.n_samples, report.seed)
    hybrid = EstimatorConfig(kind="dr", beta=0.5, rho_clip=None)
    by_eps = [
        measure_estimator(*args, hybrid, report.n_samples, report.seed, "noise", eps).variance
        for eps in (0.0, 0.005, 0.01)
    ]
    report.add("Var(hybrid beta=0.5, exact) < Var(MC return)", by_eps[0], mc.variance, by_eps[0] < mc.variance)
    report.add("Var(DR exact) <= Var(MC return)", dr.variance, mc.variance, dr.variance <= mc.variance)
    report.add("Var(hybrid) eps 0 -> 0.005 non-decreasing", by_eps[1], by_eps[0], by_eps[1] >= by_eps[0])
    report.add("Var(hybrid) eps 0.005 -> 0.01 non-decreasing", by_eps[2], by_eps[1], by_eps[2] >= by_eps[1])


def _collapse(report: ValidationReport) -> None:
    rng = np.random.default_rng(report.seed)
    tol = 1e-12
    worst = {"on-policy": 0.0, "dr perfect": 0.0, "hybrid ends": 0.0, "softmax shift": 0.0, "kfold mean": 0.0}
    for _ in range(200):
        h = int(rng.integers(1, 10))
        gamma = float(rng.uniform(0.5, 1.0))
        rewards = rng.uniform(-1, 1, h)
        probs = rng.uniform(0.05, 1.0, h)
        on = Trajectory([TrajectoryStep(r, p, p) for r, p in zip(rewards, probs)])
        g = discounted_return(rewards, gamma)
        worst["on-policy"] = max(worst["on-policy"], abs(v_is(on, gamma) - g), abs(v_step_is(on, gamma) - g))

        # a value model that satisfies Q-hat = r + gamma * V-hat(next) on the trajectory
        v_next = rng.uniform(-1, 1, h)
        v_next[-1] = 0.0
        pi_b = rng.uniform(0.05, 1.0, h)
        steps = [TrajectoryStep(r, pe, pb, vn, r + gamma * vn) for r, pe, pb, vn in zip(rewards, probs, pi_b, v_next)]
        root = float(rng.uniform(-1, 1))
        perfect = Trajectory(steps, v_hat_root=root)
        worst["dr perfect"] = max(worst["dr perfect"], abs(v_dr(perfect, gamma) - root))

        a, b = rng.uniform(-5, 5, 2)
        worst["hybrid ends"] = max(worst["hybrid ends"], abs(v_hybrid(a, b, 1.0) - a), abs(v_hybrid(a, b, 0.0) - b))

        q = rng.uniform(-3, 3, int(rng.integers(1, 9)))
        shift = float(rng.uniform(-50, 50))
        tau = float(rng.uniform(0.1, 5))
        worst["softmax shift"] = max(worst["softmax shift"], float(np.max(np.abs(softmax(q, tau) - softmax(q + shift, tau)))))

        k = int(rng.integers(2, 6))
        samples = list(rng.uniform(-1, 1, k * int(rng.integers(1, 6))))
        mean = math.fsum(samples) / len(samples)
        worst["kfold mean"] = max(worst["kfold mean"], abs(q_hat_kfold(samples, k) - mean))
    for name, err in worst.items():
        report.add(f"max error {name}", err, tol, err <= tol)


_SUITE_RUNNERS = {"unbiasedness": _unbiasedness, "variance": _variance, "collapse": _collapse}


def run_validation(suite: str, n_samples: int = 20000, seed: int = 7) -> ValidationReport:
    runner = _SUITE_RUNNERS.get(suite)
    if runner is None:
        raise UnknownSuite(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    report = ValidationReport(suite, n_samples, seed)
    runner(report)
    return report
