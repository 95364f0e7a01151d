"""Benchmark suite runner: report structure, determinism, parallel mode."""
import pytest

from gpid.bench import DEFAULT_SEED, SUITES, run_suite
from gpid.errors import ValidationError


def test_suite_names():
    assert SUITES == ("canonical", "coop", "rotation", "doubling", "scaling")


def test_unknown_suite_rejected():
    with pytest.raises(ValidationError):
        run_suite("warp")


def test_canonical_report_shape():
    report = run_suite("canonical")
    assert report["format"] == "gpid-bench-1"
    assert report["suite"] == "canonical"
    assert report["seed"] == DEFAULT_SEED
    assert report["passed"] is True
    names = [c["name"] for c in report["criteria"]]
    assert names == ["canonical_oracle", "feasibility", "runtime"]
    oracle = report["criteria"][0]
    assert oracle["details"]["points"] == 75  # 3 cases x 5 sigma2 x 5 rho
    assert oracle["details"]["worst_err_bits"] < oracle["details"]["tol_bits"]


def test_coop_parallel_matches_sequential():
    seq = run_suite("coop", jobs=1)
    par = run_suite("coop", jobs=2)
    assert par["jobs"] == 2
    # identical numerical outcome; only wall times may differ
    a = seq["criteria"][0]["details"]
    b = par["criteria"][0]["details"]
    assert a["worst_err_bits"] == b["worst_err_bits"]
    assert a["points"] == b["points"]


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("GPID_SEED", "424242")
    report = run_suite("coop")
    assert report["seed"] == 424242


def test_explicit_seed_argument():
    report = run_suite("coop", seed=99)
    assert report["seed"] == 99
