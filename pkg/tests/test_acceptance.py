"""End-to-end acceptance gate.

One test per required behavior; each name states the tolerance it enforces.
Suite reports are computed once and shared across tests in this module.
"""
import time

import numpy as np
import pytest

from gpid.assemble import pid_distance, pid_from_solution
from gpid.bench import run_suite
from gpid.channel import reduce_to_channel
from gpid.solver import gradient, objective, solve
from gpid.types import CovarianceModel

_REPORTS = {}


def suite_report(name):
    if name not in _REPORTS:
        _REPORTS[name] = run_suite(name)
    return _REPORTS[name]


def criterion(report, name):
    match = [c for c in report["criteria"] if c["name"] == name]
    assert match, f"criterion {name} missing from {report['suite']} report"
    return match[0]


# --- oracle recovery ----------------------------------------------------------

def test_canonical_grid_within_1e8_bits_under_10s():
    report = suite_report("canonical")
    oracle = criterion(report, "canonical_oracle")
    assert oracle["details"]["points"] == 75
    assert oracle["details"]["worst_err_bits"] < 1e-8
    assert criterion(report, "runtime")["details"]["wall_s"] < 10.0
    assert report["passed"]


def test_coop_gain_grid_within_1e8_bits_under_10s():
    report = suite_report("coop")
    oracle = criterion(report, "coop_oracle")
    assert oracle["details"]["points"] == 5
    assert oracle["details"]["worst_err_bits"] < 1e-8
    assert criterion(report, "runtime")["details"]["wall_s"] < 10.0
    assert report["passed"]


def test_rotation_endpoints_within_1e8_bits_sweep_steps_below_0p05_bits_under_30s():
    report = suite_report("rotation")
    ends = criterion(report, "rotation_endpoints")
    assert ends["details"]["worst_err_bits"] < 1e-8
    sweep = criterion(report, "rotation_sweep_continuity")
    assert sweep["details"]["points"] == 50
    assert sweep["details"]["max_adjacent_jump_bits"] < 0.05
    assert criterion(report, "runtime")["details"]["wall_s"] < 30.0
    assert report["passed"]


def test_doubling_within_1e7_per_copy_bits_under_60s():
    report = suite_report("doubling")
    add = criterion(report, "doubling_additivity")
    assert sorted(add["details"]["errs_bits"]) == ["16", "2", "32", "4", "8"]
    for k, err in add["details"]["errs_bits"].items():
        assert err < 1e-7 * int(k), f"k={k}: {err:.3e} bits"
    assert criterion(report, "runtime")["details"]["wall_s"] < 60.0
    assert report["passed"]


# --- gradient correctness -------------------------------------------------------

def test_gradient_matches_central_differences_to_1e5_rel_under_30s():
    t0 = time.perf_counter()
    rng = np.random.default_rng(90125)
    worst = 0.0
    for _ in range(20):
        d1 = int(rng.integers(1, 9))
        d2 = int(rng.integers(1, 6))
        dy = int(rng.integers(1, 4))
        d = d1 + d2 + dy
        a = rng.standard_normal((d, d)) / np.sqrt(d)
        cov = CovarianceModel(d1=d1, d2=d2, dy=dy, mean=np.zeros(d),
                              sigma=a @ a.T + 0.25 * np.eye(d))
        ch = reduce_to_channel(cov)
        for _ in range(20):
            sig = rng.uniform(-1.0, 1.0, size=(d1, d2))
            nrm = np.linalg.norm(sig, 2)
            if nrm > 0.95:
                sig *= rng.uniform(0.1, 0.95) / nrm
            g = 2.0 * gradient(ch, sig)  # doubled: see the solver docstring
            h = 1e-6
            fd = np.empty_like(sig)
            for i in range(d1):
                for j in range(d2):
                    e = np.zeros_like(sig)
                    e[i, j] = h
                    fd[i, j] = (objective(ch, sig + e)
                                - objective(ch, sig - e)) / (2.0 * h)
            scale = max(np.linalg.norm(fd), 1e-8)
            worst = max(worst, np.linalg.norm(g - fd) / scale)
    elapsed = time.perf_counter() - t0
    assert worst < 1e-5, f"worst relative gradient error {worst:.3e}"
    assert elapsed < 30.0, f"gradient check took {elapsed:.1f}s"


# --- feasibility and bounds ------------------------------------------------------

def test_feasibility_and_component_bounds_hold_on_every_suite_instance():
    for name in ("canonical", "coop", "rotation", "doubling"):
        feas = criterion(suite_report(name), "feasibility")
        det = feas["details"]
        assert det["max_sv"] <= det["sv_cap"] + 1e-15, name
        assert det["worst_lower_slack"] >= -1e-7, name
        assert det["worst_upper_slack"] >= -1e-7, name
        assert det["min_raw_component"] >= -1e-7, name
        assert feas["passed"], name


# --- invariance -------------------------------------------------------------------

def test_components_invariant_under_linear_maps_to_1e6_bits():
    rng = np.random.default_rng(5150)
    worst = 0.0
    for _ in range(10):
        d1 = int(rng.integers(1, 17))
        d2 = int(rng.integers(1, 17))
        dy = int(rng.integers(1, 5))
        d = d1 + d2 + dy
        a = rng.standard_normal((d, d)) / np.sqrt(d)
        sigma = a @ a.T + 0.25 * np.eye(d)
        cov = CovarianceModel(d1=d1, d2=d2, dy=dy, mean=np.zeros(d),
                              sigma=sigma)
        base = pid_from_solution(reduce_to_channel(cov),
                                 solve(reduce_to_channel(cov))).converted("bits")

        blocks = []
        for k in (d1, d2, dy):
            m = rng.standard_normal((k, k))
            u, _, vt = np.linalg.svd(m)
            # well-conditioned invertible map: random rotation, mixed scales
            m = u @ np.diag(rng.uniform(0.5, 2.0, size=k)) @ vt
            blocks.append(m)
        t = np.zeros((d, d))
        t[:d1, :d1] = blocks[0]
        t[d1:d1 + d2, d1:d1 + d2] = blocks[1]
        t[d1 + d2:, d1 + d2:] = blocks[2]
        mapped = CovarianceModel(d1=d1, d2=d2, dy=dy, mean=np.zeros(d),
                                 sigma=t @ sigma @ t.T)
        ch = reduce_to_channel(mapped)
        pid = pid_from_solution(ch, solve(ch)).converted("bits")

        for key in ("r", "u1", "u2", "s"):
            worst = max(worst, abs(getattr(pid, key) - getattr(base, key)))
    assert worst < 1e-6, f"worst component shift {worst:.3e} bits"


# --- complexity scaling ---------------------------------------------------------------

def test_thin_solve_runs_4x_faster_and_time_slope_stays_below_3p4_under_10min():
    report = suite_report("scaling")
    ratio = criterion(report, "scaling_thin_dim")
    assert ratio["details"]["ratio"] < 0.25
    slope = criterion(report, "scaling_slope")
    assert slope["details"]["loglog_slope"] <= 3.4
    assert criterion(report, "runtime")["details"]["wall_s"] < 600.0
    assert report["passed"]


# --- behavioural spot checks (worked example values) ------------------------------------

def test_worked_example_components_match_published_table():
    from gpid.synth import SynthSpec, make_instance
    inst = make_instance(SynthSpec("canonical1d",
                                   {"case": "uniq_red", "sigma2": 1.0}))
    ch = reduce_to_channel(inst.cov)
    pid = pid_from_solution(ch, solve(ch)).converted("bits")
    assert abs(pid.r - 0.29248125) < 1e-7
    assert abs(pid.u1 - 0.20751875) < 1e-7
    assert abs(pid.u2) < 1e-7
    assert abs(pid.s) < 1e-7
    assert pid_distance(pid, inst.oracle.converted("bits")) < 1e-7
