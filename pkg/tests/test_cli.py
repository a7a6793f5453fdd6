import json
import logging

import pytest

from rebalance.cli import build_parser, cli_parse, main


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def config_path(tmp_path):
    data = {
        "datasets": [{"name": "gauss", "synthetic": {"kind": "two_gaussians", "n_major": 90,
                                                      "n_minor": 24, "overlap": 0.5, "seed": 3}}],
        "methods": ["none", "smote"],
        "k_folds": 3,
        "repeats": 1,
        "output_dir": "results",
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


def test_bench_with_seed_override(config_path, tmp_path, capsys):
    out = tmp_path / "seeded"
    assert main(["-q", "bench", "--config", str(config_path), "--seed", "7", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["config"]["global_seed"] == 7
    assert (out / "results.csv").is_file()
    assert "Done. 6 fold results" in capsys.readouterr().out


def test_output_dir_relative_to_config(config_path, tmp_path):
    assert main(["-q", "bench", "--config", str(config_path)]) == 0
    assert (tmp_path / "results" / "summary.md").is_file()


def test_overrides_reach_the_config(config_path):
    req = cli_parse(["bench", "--config", str(config_path), "--k-folds", "4", "--methods", "smote", "--jobs", "2",
                     "--audit"])
    cfg = req.config
    assert (cfg.k_folds, cfg.methods, cfg.n_jobs, cfg.audit) == (4, ["smote"], 2, True)


def test_unknown_flag_exits_2(config_path):
    assert main(["bench", "--config", str(config_path), "--colour", "red"]) == 2


def test_unknown_method_exits_2(config_path):
    assert main(["bench", "--config", str(config_path), "--methods", "smote,mwmote"]) == 2


def test_missing_config_exits_2(tmp_path, capsys):
    assert main(["bench", "--config", str(tmp_path / "absent.json")]) == 2
    assert "config error" in capsys.readouterr().err


def test_invalid_config_exits_2(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"datasets": [], "methods": ["smote"]}), encoding="utf-8")
    assert main(["bench", "--config", str(path)]) == 2


def test_run_failure_writes_error_json(tmp_path, capsys):
    data = {"datasets": [{"path": "missing.csv"}], "methods": ["smote"], "output_dir": "out"}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    assert main(["-q", "bench", "--config", str(path)]) == 1
    record = json.loads((tmp_path / "out" / "error.json").read_text(encoding="utf-8"))
    assert record["error_type"] == "LoadError"
    assert record["method"] is None
    assert "LoadError" in capsys.readouterr().err


def test_gradcheck(capsys):
    assert main(["-q", "gradcheck", "--cases", "5", "--seed", "1"]) == 0
    assert "gradcheck passed: 5 cases" in capsys.readouterr().out


def test_gradcheck_defaults_exit_zero(capsys):
    assert main(["-q", "gradcheck"]) == 0
    assert "gradcheck passed: 100 cases" in capsys.readouterr().out


def test_stability(config_path, tmp_path):
    out = tmp_path / "stab"
    code = main(["-q", "stability", "--config", str(config_path), "--methods", "smote", "--seeds", "0,1,2",
                 "--out", str(out)])
    assert code == 0
    runs = json.loads((out / "stability_runs.json").read_text(encoding="utf-8"))
    assert runs["seeds"] == [0, 1, 2]
    assert len(runs["digests"]["smote"]) == 3
    assert (out / "stability.csv").is_file()


def test_stability_unknown_dataset(config_path):
    assert main(["-q", "stability", "--config", str(config_path), "--dataset", "nope", "--runs", "2"]) == 2


def test_validate_data_exports(config_path, tmp_path, capsys):
    export = tmp_path / "export"
    assert main(["-q", "validate-data", "--config", str(config_path), "--export", str(export)]) == 0
    out = capsys.readouterr().out
    assert "gauss: 114 rows, 2 attributes, 24 pos / 90 neg (not in registry)" in out
    assert (export / "gauss.csv").is_file()


def test_seeds_and_runs_are_exclusive(config_path):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["stability", "--config", str(config_path), "--seeds", "1,2", "--runs", "3"])
