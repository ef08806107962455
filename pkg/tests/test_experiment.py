import csv
import io
import json
from dataclasses import replace

import numpy as np
import pytest

from neuro_irl import experiment as ex
from neuro_irl.experiment import (
    CSV_HEADER,
    Algorithm,
    ConfigError,
    ExperimentConfig,
    read_csv,
    run_experiment,
    sweep,
    worker_count,
)

FAST = dict(pop=12, gens=6, runs=3)


def _mispredictions(result):
    return [r.misprediction for r in result.rows]


def test_csv_header_is_exact():
    res = run_experiment(ExperimentConfig(**FAST), workers=1)
    text = res.to_csv()
    assert text.splitlines()[0] == (
        "run,seed,algorithm,n,d,mdp_kind,n_samples,sample_len,pop,gens,goals,"
        "misprediction,seconds,generations_run,terminated_early"
    )
    assert text.splitlines()[0] == CSV_HEADER
    assert len(text.splitlines()) == 1 + 3


def test_rows_and_aggregate():
    res = run_experiment(ExperimentConfig(base_seed=10, **FAST), workers=1)
    assert [r.run for r in res.rows] == [0, 1, 2]
    assert [r.seed for r in res.rows] == [10, 11, 12]
    agg = res.aggregate
    assert agg.count == 3
    assert abs(agg.mean - np.mean(_mispredictions(res))) < 1e-12
    assert all(0.0 <= m <= 1.0 for m in _mispredictions(res))


@pytest.mark.parametrize("algorithm", list(Algorithm))
def test_same_config_twice_is_identical(algorithm):
    cfg = ExperimentConfig(algorithm=algorithm, d=0.7, mdp_kind="linear", goals=2, iterations=6, **FAST)
    a, b = run_experiment(cfg, workers=1), run_experiment(cfg, workers=1)

    def without_timing(text):
        rows = list(csv.reader(io.StringIO(text)))
        col = rows[0].index("seconds")
        return [r[:col] + r[col + 1 :] for r in rows]

    assert without_timing(a.to_csv()) == without_timing(b.to_csv())
    assert [r.misprediction for r in a.rows] == [r.misprediction for r in b.rows]


def test_worker_pool_matches_serial():
    cfg = ExperimentConfig(algorithm="bnp-neat", d=0.7, mdp_kind="linear", goals=1, iterations=6, **FAST)
    serial = run_experiment(cfg, workers=1)
    pooled = run_experiment(cfg, workers=2)
    assert _mispredictions(serial) == _mispredictions(pooled)


def test_exact_reproduction_scores_zero():
    # every state demonstrated on a tiny grid: the evolved values reproduce the expert
    cfg = ExperimentConfig(n=2, goal_states=(3,), n_samples=16, sample_len=1, runs=3)
    assert _mispredictions(run_experiment(cfg, workers=1)) == [0.0, 0.0, 0.0]


def test_fixed_goal_states_are_used():
    cfg = ExperimentConfig(n=4, goal_states=(0, 15), goal_reward=100.0, runs=1)
    world = ex.build_run_world(cfg, 0)
    assert np.flatnonzero(world.rewards).tolist() == [0, 15]
    assert cfg.goal_count == 2


def test_random_goals_differ_by_seed():
    cfg = ExperimentConfig(n=4, goals=3)
    a, b = ex.build_run_world(cfg, 0), ex.build_run_world(cfg, 1)
    assert np.sum(a.rewards == 100.0) == 3
    assert not np.array_equal(a.rewards, b.rewards)


def test_csv_round_trip(tmp_path):
    out = tmp_path / "runs.csv"
    res = run_experiment(ExperimentConfig(out=str(out), **FAST), workers=1)
    rows = read_csv(out)
    assert len(rows) == 3
    assert [float(r["misprediction"]) for r in rows] == _mispredictions(res)
    assert {r["terminated_early"] for r in rows} <= {"true", "false"}


def test_failed_runs_are_recorded_and_excluded(monkeypatch):
    def boom(config, seed):
        if seed == 1:
            raise RuntimeError("no world")
        return original(config, seed)

    original = ex.build_run_world
    monkeypatch.setattr(ex, "build_run_world", boom)
    res = run_experiment(ExperimentConfig(**FAST), workers=1)
    assert len(res.failed) == 1
    assert res.rows[1].misprediction is None
    assert "no world" in res.rows[1].error
    assert res.aggregate.count == 2


def test_sweep_shapes(tmp_path):
    out = tmp_path / "sweep.csv"
    results = sweep(ExperimentConfig(pop=8, gens=3, runs=2), "n_samples", range(1, 9), out=str(out))
    assert [r.config.n_samples for r in results] == list(range(1, 9))
    assert len(read_csv(out)) == 16


def test_goal_sweep_gives_table_shape():
    base = ExperimentConfig(algorithm="bnp-mean", d=0.7, mdp_kind="linear", iterations=4, runs=3)
    means = {}
    for algo in ("bnp-mean", "bnp-neat"):
        for res in sweep(replace(base, algorithm=algo, pop=8, gens=3), "goals", [1, 2, 3, 4]):
            means[(algo, res.config.goals)] = res
    for g in (1, 2, 3, 4):
        tt = means[("bnp-mean", g)].compare(means[("bnp-neat", g)])
        assert 0.0 <= tt.p_value <= 1.0


def test_two_algorithms_share_worlds_and_demos():
    cfg = ExperimentConfig(d=0.7, mdp_kind="linear", goals=2, iterations=4, runs=4, pop=8, gens=3)
    a = run_experiment(replace(cfg, algorithm="bnp-mean"), workers=1)
    b = run_experiment(replace(cfg, algorithm="bnp-neat"), workers=1)
    assert [r.seed for r in a.rows] == [r.seed for r in b.rows]
    tt = a.compare(b)
    assert np.isfinite(tt.degrees_of_freedom) or tt.p_value in (0.0, 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [dict(runs=0), dict(n=1), dict(goals=17), dict(n_samples=0), dict(pop=0), dict(algorithm="gpirl"),
     dict(mdp_kind="quadratic"), dict(evolution={"mutation_power": 2.0})],
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        ExperimentConfig(**kwargs)


def test_config_file_round_trip(tmp_path):
    cfg = ExperimentConfig(algorithm="bnp-neat", n=5, goal_states=(1, 2), evolution={"p_add_node": 0.1})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.load(path) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"algorithm": "neat-irl", "colour": "red"})


def test_algorithm_aliases():
    assert Algorithm.parse("NEAT-IRL") is Algorithm.NEAT_IRL
    assert Algorithm.parse("bnp_mean") is Algorithm.BNP_MEAN


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("NEURO_IRL_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("NEURO_IRL_THREADS", "many")
    with pytest.raises(ConfigError):
        worker_count()
    monkeypatch.delenv("NEURO_IRL_THREADS")
    assert worker_count(default=5) == 5


@pytest.mark.slow
def test_large_grid_comparison_produces_comparable_csvs(tmp_path):
    base = ExperimentConfig(n=16, n_samples=8, sample_len=4, d=0.7, mdp_kind="linear", runs=25, pop=10, gens=5)
    a = run_experiment(replace(base, algorithm="bnp-mean", out=str(tmp_path / "mean.csv")))
    b = run_experiment(replace(base, algorithm="bnp-neat", out=str(tmp_path / "neat.csv")))
    assert len(read_csv(tmp_path / "mean.csv")) == len(read_csv(tmp_path / "neat.csv")) == 25
    assert not a.failed and not b.failed
    assert 0.0 <= a.compare(b).p_value <= 1.0
