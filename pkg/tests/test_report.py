import json

import numpy as np
import pytest

from dclose.errors import ConfigError
from dclose.io import HandleMap, emit_list_file, read_csv
from dclose.models import generate
from dclose.report import config_header, randtest_targets, run_experiment
from dclose.schemas import ModelParams, parse_experiment_config
from dclose.stats import correlate, mae


def _config(out_dir, **overrides):
    data = {
        "model": {"kind": "pa", "N": 400, "D": 4, "alpha": 0.3, "seed": 7},
        "out_dir": str(out_dir),
        "seed": 3,
        "analysis": {"top_m": 5, "corr_top": 50, "runs": 5},
    }
    data.update(overrides)
    return parse_experiment_config(data)


def test_outputs_are_reproducible_across_directories(tmp_path):
    a = run_experiment(_config(tmp_path / "a"))
    b = run_experiment(_config(tmp_path / "b"))
    assert sorted(a.files) == sorted(b.files)
    assert "heuristic.csv" in a.files and "randtest.csv" in a.files
    for name in a.files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_csv_headers_echo_config(tmp_path):
    config = _config(tmp_path / "out")
    bundle = run_experiment(config)
    text = bundle.files["profiles.csv"].read_text(encoding="utf-8")
    header = [line for line in text.splitlines() if line.startswith("# ")]
    assert header == [f"# {line}" for line in config_header(config)]
    assert any(line.startswith("# alpha_note: ") for line in header)
    echoed = json.loads(header[1][len("# config: "):])
    assert echoed["model"]["alpha"] == 0.3
    assert "out_dir" not in echoed


def test_summary_correlations_can_be_recomputed_exactly(tmp_path):
    bundle = run_experiment(_config(tmp_path / "out"))
    table = read_csv(bundle.files["correlation_nodes.csv"])
    summary = json.loads(bundle.files["summary.json"].read_text(encoding="utf-8"))
    assert len(table) == 50
    for method in ("pearson", "spearman"):
        assert summary["correlation"]["in_degree"][method] == correlate(table["final_ratio"], table["in_degree"], method)
        assert summary["correlation"]["follower_sum"][method] == correlate(
            table["final_ratio"], table["follower_indegree_sum"], method
        )

    approx = read_csv(bundle.files["heuristic.csv"]).sort_values("rank").head(50)
    assert summary["approx"]["top"] == 50
    assert summary["approx"]["mae_top"] == mae(approx["measured"], approx["approx"])


def test_trajectory_and_profile_tables(tmp_path):
    bundle = run_experiment(_config(tmp_path / "out"))
    traj = read_csv(bundle.files["trajectory.csv"])
    profiles = read_csv(bundle.files["profiles.csv"])
    assert list(traj.columns) == ["node", "in_degree", "arrival", "ratio"]
    assert traj["node"].nunique() == 5
    assert traj["ratio"].between(0, 1).all()
    for node, group in traj.groupby("node"):
        assert group["arrival"].tolist() == list(range(1, len(group) + 1))
        row = profiles[profiles["node"] == node].iloc[0]
        assert group["ratio"].iloc[-1] == row["final_ratio"]
    assert sorted(profiles["rank"]) == list(range(400))
    assert "same_community_sum" not in profiles.columns


def test_community_profiles_have_same_community_sums(tmp_path):
    config = _config(
        tmp_path / "out",
        model={"kind": "pa_communities", "N": 300, "D": 3, "C": 3, "alpha": 0.7, "beta": 0.9, "seed": 2},
        analyses=["profile", "correlation"],
        analysis={"community_analysis": True, "corr_top": 30},
    )
    bundle = run_experiment(config)
    profiles = read_csv(bundle.files["profiles.csv"])
    assert (profiles["same_community_sum"] <= profiles["follower_indegree_sum"]).all()
    assert "community" in profiles.columns
    assert "same_community_sum" in bundle.summary["correlation"]


def test_randtest_rows_are_well_formed(tmp_path):
    bundle = run_experiment(_config(tmp_path / "out", analyses=["randtest"], analysis={"runs": 10}))
    rows = read_csv(bundle.files["randtest.csv"])
    assert (rows["size"] > 10).all()
    assert (rows["baseline_min"] <= rows["baseline_mean"]).all()
    assert (rows["baseline_mean"] <= rows["baseline_max"]).all()
    assert (rows["runs"] == 10).all()
    zero = rows[rows["k"] == 0]
    assert (zero["observed"] == 0).all()
    ordering = read_csv(bundle.files["ordering.csv"])
    assert len(ordering) == 1
    [entry] = bundle.summary["randtest"]
    assert entry["crossover_K"] == "inf" or int(entry["crossover_K"]) >= 0


def test_workers_do_not_change_outputs(tmp_path):
    serial = run_experiment(_config(tmp_path / "w1", analyses=["trajectory", "randtest"]))
    parallel = run_experiment(_config(
        tmp_path / "w3", analyses=["trajectory", "randtest"],
        analysis={"top_m": 5, "corr_top": 50, "runs": 5, "workers": 3},
    ))
    for name in ("trajectory.csv", "randtest.csv", "ordering.csv", "summary.json"):
        a = serial.files[name].read_text(encoding="utf-8").splitlines()
        b = parallel.files[name].read_text(encoding="utf-8").splitlines()
        # 配置回显里的 workers 不同，只比较数据行
        assert [x for x in a if not x.startswith("# ") and "workers" not in x] == \
               [x for x in b if not x.startswith("# ") and "workers" not in x]


def test_conflicting_config_fails_before_writing(tmp_path):
    g_trace = generate(ModelParams(kind="pa", N=50, D=2, seed=1))
    path = tmp_path / "g.lists"
    emit_list_file(g_trace.graph, path, HandleMap.numbered(50))
    out_dir = tmp_path / "never"
    config = parse_experiment_config({
        "input_path": str(path),
        "input_format": "lists",
        "analyses": ["profile"],
        "out_dir": str(out_dir),
        "analysis": {"community_analysis": True},
    })
    with pytest.raises(ConfigError):
        run_experiment(config)
    assert not out_dir.exists()

    with pytest.raises(ConfigError):
        run_experiment(_config(out_dir, analysis={"randtest_nodes": [10_000]}))
    assert not out_dir.exists()


def test_experiment_config_rejects_impossible_combinations():
    with pytest.raises(ConfigError):
        parse_experiment_config({"out_dir": "x"})
    with pytest.raises(ConfigError):
        parse_experiment_config({"model": {"kind": "pa"}, "analysis": {"community_analysis": True}})
    with pytest.raises(ConfigError):
        parse_experiment_config({"input_path": "g.csv", "analyses": ["approx"]})
    with pytest.raises(ConfigError):
        parse_experiment_config({"input_path": "g.lists", "input_format": "lists", "model": {"kind": "pa"}})


def test_list_input_writes_handles(tmp_path):
    trace = generate(ModelParams(kind="pa", N=60, D=3, seed=4))
    path = tmp_path / "g.lists"
    emit_list_file(trace.graph, path, HandleMap.numbered(60))
    config = parse_experiment_config({
        "input_path": str(path),
        "input_format": "lists",
        "analyses": ["profile", "randtest"],
        "out_dir": str(tmp_path / "out"),
        "analysis": {"runs": 3, "exclude_undeterminable": True},
        "celebrity": {"min_in": 5, "max_in": 1000},
    })
    bundle = run_experiment(config)
    assert "handles.csv" in bundle.files
    profiles = read_csv(bundle.files["profiles.csv"], keep_default_na=False)
    assert profiles["handle"].str.match(r"^n\d+$").all()
    assert bundle.summary["excluded_edges"] == 0


def test_randtest_targets_prefer_explicit_nodes(tmp_path):
    config = _config(tmp_path, analysis={"randtest_nodes": [3, 1]})
    g = generate(config.model).graph
    assert randtest_targets(config, g) == [3, 1]
    assert randtest_targets(_config(tmp_path), g) == g.top_by_in_degree(1)


def test_heuristic_trace_output(tmp_path):
    bundle = run_experiment(_config(
        tmp_path / "out", analyses=["approx"],
        analysis={"heuristic_trace": True, "trace_steps": 10, "top_m": 2},
    ))
    trace = read_csv(bundle.files["heuristic_trace.csv"])
    assert list(trace.columns) == ["node", "t", "in_degree", "s", "c"]
    assert trace["node"].nunique() == 2
    assert np.all((trace["c"] >= 0) & (trace["c"] < 1))
