"""End-to-end command-line runs: exit codes, artifacts, and recomputability."""

import json

import pytest
import yaml

from modalmesh import cli
from modalmesh.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from modalmesh.httpd import BindError


@pytest.fixture(scope="module")
def experiment_run(bundle_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "run"
    code = main(["experiment", "--manifest", str(bundle_dir / "manifest.yaml"),
                 "--seed", "42", "--out", str(out)])
    assert code == EXIT_OK
    return out


def test_experiment_writes_the_run_directory(experiment_run):
    names = {p.name for p in experiment_run.iterdir()}
    assert {"run_meta.json", "report.md", "report.json",
            "runlog_native.jsonl", "runlog_text_bottleneck.jsonl",
            "telemetry_native.jsonl",
            "telemetry_text_bottleneck.jsonl"} <= names
    meta = json.loads((experiment_run / "run_meta.json").read_text())
    assert meta["seed"] == 42
    assert meta["treatment_mode"] == "native"
    assert meta["baseline_mode"] == "text_bottleneck"
    assert meta["backend"] == "scripted"


def test_experiment_headline_numbers(experiment_run):
    payload = json.loads((experiment_run / "report.json").read_text())
    assert payload["n_tasks"] == 50
    assert payload["tca"]["treatment"] == pytest.approx(0.52)
    assert payload["tca"]["baseline"] == pytest.approx(0.32)
    assert payload["contingency"] == {"both_correct": 15, "treatment_only": 11,
                                      "baseline_only": 1, "both_wrong": 23}
    assert payload["mcnemar"]["p_value"] == pytest.approx(0.00634765625)
    assert payload["bootstrap"] == {"lo_pp": 8.0, "hi_pp": 32.0,
                                    "resamples": 10_000, "seed": 42,
                                    "confidence": 0.95}
    profiles = payload["routing_profiles"]
    assert profiles["treatment"]["voice"] == {"native": 40, "transcoded": 0}
    assert profiles["treatment"]["image"] == {"native": 28, "transcoded": 12}
    assert profiles["baseline"]["voice"] == {"native": 0, "transcoded": 40}
    assert profiles["baseline"]["image"] == {"native": 0, "transcoded": 40}
    modes = {row["failure_mode"]: row["count"] for row in payload["error_modes"]}
    assert modes == {"policy_lookup_failure": 11,
                     "action_granularity_confusion": 6,
                     "overconfident_visual_grounding": 4,
                     "insufficient_context": 3}
    assert all(row["all_failed_in_treatment"] for row in payload["error_modes"])


def test_report_recompute_is_byte_identical(experiment_run, tmp_path):
    original = (experiment_run / "report.json").read_bytes()
    original_md = (experiment_run / "report.md").read_bytes()
    code = main(["report", str(experiment_run), "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert (tmp_path / "report.json").read_bytes() == original
    assert (tmp_path / "report.md").read_bytes() == original_md


def test_report_seed_override_changes_only_the_interval(experiment_run, tmp_path):
    code = main(["report", str(experiment_run), "--seed", "7",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    payload = json.loads((tmp_path / "report.json").read_text())
    original = json.loads((experiment_run / "report.json").read_text())
    assert payload["bootstrap"]["seed"] == 7
    assert payload["tca"] == original["tca"]
    assert payload["mcnemar"] == original["mcnemar"]


def test_validate_manifest_summary(bundle_dir, capsys):
    code = main(["validate-manifest",
                 "--manifest", str(bundle_dir / "manifest.yaml")])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "50" in out and "error labels: 24" in out


def test_config_file_supplies_defaults_and_flags_win(bundle_dir, tmp_path, capsys):
    config_path = tmp_path / "modalmesh.yaml"
    config_path.write_text(yaml.safe_dump({
        "benchmark": {"manifest": str(bundle_dir / "manifest.yaml")},
        "experiment": {"seed": 42, "backend": "scripted"},
    }), encoding="utf-8")
    # config file alone satisfies --seed; flag overrides the manifest path
    code = main(["--config", str(config_path), "validate-manifest"])
    assert code == EXIT_OK
    missing = tmp_path / "nowhere.yaml"
    code = main(["--config", str(config_path), "validate-manifest",
                 "--manifest", str(missing)])
    assert code == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "nowhere.yaml" in err


def test_experiment_without_seed_is_a_config_error(bundle_dir, capsys):
    code = main(["experiment",
                 "--manifest", str(bundle_dir / "manifest.yaml")])
    assert code == EXIT_CONFIG
    assert "--seed" in capsys.readouterr().err


def test_adaptive_mode_requires_theta(bundle_dir):
    code = main(["experiment", "--manifest", str(bundle_dir / "manifest.yaml"),
                 "--seed", "1", "--mode", "adaptive"])
    assert code == EXIT_CONFIG


def test_llm_backend_without_endpoint_is_a_config_error(bundle_dir, monkeypatch):
    monkeypatch.delenv("MODALMESH_LLM_ENDPOINT", raising=False)
    code = main(["experiment", "--manifest", str(bundle_dir / "manifest.yaml"),
                 "--seed", "1", "--backend", "llm"])
    assert code == EXIT_CONFIG


def test_report_on_a_non_run_directory_fails_cleanly(tmp_path, capsys):
    code = main(["report", str(tmp_path)])
    assert code == EXIT_CONFIG
    assert "run_meta.json" in capsys.readouterr().err


def test_runtime_failures_exit_three(bundle_dir, tmp_path, monkeypatch):
    def exploding_start_mesh(*args, **kwargs):
        raise BindError("port already bound")

    monkeypatch.setattr(cli, "start_mesh", exploding_start_mesh)
    code = main(["experiment", "--manifest", str(bundle_dir / "manifest.yaml"),
                 "--seed", "1", "--out", str(tmp_path / "x")])
    assert code == EXIT_RUNTIME


@pytest.fixture(scope="module")
def ablation_run(bundle_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "ablation"
    code = main(["ablation", "--manifest", str(bundle_dir / "manifest.yaml"),
                 "--seed", "42", "--out", str(out)])
    assert code == EXIT_OK
    return out


def test_ablation_grid_values(ablation_run):
    payload = json.loads((ablation_run / "ablation.json").read_text())
    assert payload["modes"] == ["native", "text_bottleneck"]
    grid = payload["grid"]
    assert grid["keyword"]["native"] == 18
    assert grid["keyword"]["text_bottleneck"] == 18
    assert grid["keyword"]["identical_actions"] == 35
    assert grid["keyword"]["identical_rate"] == pytest.approx(0.70)
    assert grid["scripted"]["native"] == 26
    assert grid["scripted"]["text_bottleneck"] == 16
    assert (ablation_run / "ablation.md").exists()
    assert (ablation_run / "keyword" / "runlog_native.jsonl").exists()
    assert (ablation_run / "scripted" / "runlog_text_bottleneck.jsonl").exists()
