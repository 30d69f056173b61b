import json

import pytest

from drmcts import harness
from drmcts.cli import main
from drmcts.errors import UnknownSuite
from drmcts.estimators import EstimatorConfig
from drmcts.harness import (
    CSV_HEADER,
    TournamentConfig,
    TournamentRow,
    build_config,
    game_seed,
    load_config_file,
    run_tournament,
    run_validation,
    write_results,
)
from drmcts.search import GameRecord, Outcome


def tiny(tmp_path, **kw):
    base = dict(algo_a=EstimatorConfig(kind="dr"), algo_b=EstimatorConfig(kind="mcts"), rollout_counts=(5, 10),
                games_per_setting=4, base_seed=42, output_path=tmp_path / "r.csv")
    base.update(kw)
    return TournamentConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        TournamentConfig(EstimatorConfig(), EstimatorConfig(), rollout_counts=())
    with pytest.raises(ValueError):
        TournamentConfig(EstimatorConfig(), EstimatorConfig(), games_per_setting=0)


def test_write_results_examples(tmp_path):
    path = tmp_path / "out.csv"
    write_results([TournamentRow(100, "dr", "mcts", 63, 37, 0, 42)], path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n100,dr,mcts,63,37,0,0.6300,0.3700,42\n"
    assert json.loads(path.with_suffix(".json").read_text())["rows"][0]["win_rate_a"] == "0.6300"
    write_results([], path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"
    rows = [TournamentRow(20, "is", "mcts", 3, 5, 2, 7)]
    write_results(rows, path)
    first = path.read_bytes()
    write_results(rows, path)
    assert path.read_bytes() == first


def test_write_results_bad_path(tmp_path):
    with pytest.raises(OSError):
        write_results([], tmp_path / "missing" / "r.csv")


def test_game_seeds_are_stable_and_distinct():
    assert game_seed(42, 20, 0) == game_seed(42, 20, 0)
    seeds = {game_seed(42, r, i) for r in (20, 40) for i in range(100)}
    assert len(seeds) == 200
    assert game_seed(1, 20, 0) != game_seed(2, 20, 0)


def test_alternation(tmp_path, monkeypatch):
    sides = []

    def fake_game(px, po, seed, start=None):
        sides.append(px.config.kind.value)
        return GameRecord(Outcome.X_WINS, ())

    monkeypatch.setattr(harness, "play_game", fake_game)
    rows = run_tournament(tiny(tmp_path, rollout_counts=(3,), games_per_setting=2))
    assert sides == ["dr", "mcts"]
    assert (rows[0].wins_a, rows[0].wins_b, rows[0].draws) == (1, 1, 0)

    sides.clear()
    run_tournament(tiny(tmp_path, rollout_counts=(3,), games_per_setting=7))
    assert sides.count("dr") == 4


def test_tournament_reproducible_and_accounted(tmp_path):
    cfg = tiny(tmp_path)
    rows = run_tournament(cfg)
    first = cfg.output_path.read_bytes()
    assert [r.rollouts for r in rows] == [5, 10]
    assert all(r.wins_a + r.wins_b + r.draws == 4 for r in rows)
    assert all(r.win_rate_a == r.wins_a / 4 for r in rows)
    run_tournament(cfg)
    assert cfg.output_path.read_bytes() == first
    meta = json.loads(cfg.output_path.with_suffix(".json").read_text())
    assert meta["config"]["algo_a"]["kind"] == "dr" and meta["config"]["base_seed"] == 42


def test_parallel_matches_sequential(tmp_path):
    seq = run_tournament(tiny(tmp_path, output_path=None))
    par = run_tournament(tiny(tmp_path, output_path=None), workers=2)
    assert seq == par


@pytest.mark.slow
def test_self_play_has_no_side_bias():
    same = EstimatorConfig(kind="mcts")
    rows = run_tournament(TournamentConfig(same, same, rollout_counts=(20,), games_per_setting=100, base_seed=42))
    assert abs(rows[0].wins_a - rows[0].wins_b) <= 30


def test_config_file_and_overrides(tmp_path):
    ini = tmp_path / "t.ini"
    ini.write_text("[tournament]\nalgo_a = is\nrollout_counts = 5, 7\ngames_per_setting = 2\nbeta = 0.25\n"
                   "rho_clip = none\noutput_path = x.csv\n")
    settings = load_config_file(ini)
    assert settings["rollout_counts"] == (5, 7) and settings["rho_clip"] is None
    cfg = build_config(settings)
    assert cfg.algo_a.kind.value == "is" and cfg.algo_a.beta == 0.25 and cfg.algo_b.rho_clip is None
    bad = tmp_path / "bad.ini"
    bad.write_text("[tournament]\nbogus = 1\n")
    with pytest.raises(ValueError):
        load_config_file(bad)


def test_cli_tournament_flags_override_file(tmp_path, capsys):
    ini = tmp_path / "t.ini"
    ini.write_text(f"[tournament]\ngames_per_setting = 9\nrollout_counts = 50\noutput_path = {tmp_path / 'ignored.csv'}\n")
    out = tmp_path / "r.csv"
    code = main(["tournament", "--config", str(ini), "--games", "2", "--rollouts", "4", "--algo-a", "is",
                 "--seed", "3", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    fields = lines[1].split(",")
    assert fields[:3] == ["4", "is", "mcts"] and sum(map(int, fields[3:6])) == 2 and fields[-1] == "3"
    assert not (tmp_path / "ignored.csv").exists()


def test_cli_validate_and_search(capsys):
    assert main(["validate", "--suite", "collapse", "--seed", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["suite"] == "collapse" and report["passed"]
    assert main(["search", "XX.|OO.|...", "--iterations", "50"]) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[-1])["best_action"] == 2


def test_cli_reports_bad_config(tmp_path, capsys):
    assert main(["tournament", "--config", str(tmp_path / "nope.ini")]) == 2
    assert "error" in capsys.readouterr().err


def test_validation_reports():
    with pytest.raises(UnknownSuite):
        run_validation("speed")
    report = run_validation("collapse", seed=3)
    assert report.passed and len(report.checks) == 5
    report = run_validation("unbiasedness", 20_000, 7)
    assert report.passed, report.to_json()
    assert all(c.measured <= c.threshold for c in report.checks)
