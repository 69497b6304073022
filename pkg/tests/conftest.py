"""Shared fixtures: the checked-in benchmark bundle and cached mesh runs.

The three paired experiment runs (scripted, keyword, scripted-with-delays)
are expensive enough to share session-wide; tests only ever read from them.
"""

from __future__ import annotations

import time
from pathlib import Path

import pytest

from modalmesh.agents import DELAY_PROFILES
from modalmesh.benchmark import load_manifest
from modalmesh.mesh import start_mesh
from modalmesh.orchestrator import run_paired_experiment

BUNDLE_DIR = Path(__file__).resolve().parent.parent / "data" / "benchmark"


@pytest.fixture(scope="session")
def bundle_dir() -> Path:
    return BUNDLE_DIR


@pytest.fixture(scope="session")
def manifest():
    return load_manifest(BUNDLE_DIR)


@pytest.fixture(scope="session")
def scripted_experiment(manifest, tmp_path_factory):
    """(ExperimentResult, wall seconds, out dir) for the scripted backend,
    simulated delays off."""
    out = tmp_path_factory.mktemp("scripted-run")
    started = time.perf_counter()
    with start_mesh(manifest, backend="scripted") as mesh:
        result = run_paired_experiment(mesh, out_dir=out)
    return result, time.perf_counter() - started, out


@pytest.fixture(scope="session")
def keyword_experiment(manifest, tmp_path_factory):
    out = tmp_path_factory.mktemp("keyword-run")
    with start_mesh(manifest, backend="keyword") as mesh:
        result = run_paired_experiment(mesh, out_dir=out)
    return result, out


@pytest.fixture(scope="session")
def latency_experiment(manifest):
    """Scripted run with the reference delay profile active."""
    with start_mesh(manifest, backend="scripted",
                    delay_profile=DELAY_PROFILES["reference"]) as mesh:
        return run_paired_experiment(mesh)
