"""Benchmark suites: oracle-checked solves plus the timing harness.

Five suites, each a list of named pass/fail criteria:

  canonical   scalar grid (3 cases x 5 sigma2 x 5 rho) vs the exact MMI
              oracle, 1e-8 bits per component
  coop        gain sweep alpha in {0, 0.5, 1, 2, 3} vs the additive oracle
  rotation    endpoint oracles plus a 50-point continuity sweep
  doubling    k copies vs k times the base decomposition, k up to 32
  scaling     solve-time medians across matrix sizes; checks the thin-
              direction speedup and the growth exponent

Every solved instance also feeds a shared feasibility criterion: projected
iterates stay inside the spectral cap, min_mi lands between max(i1, i2) and
ip_total, and no raw component dips below -1e-7.

Timing uses the monotonic clock, median of 5 runs after 1 warm-up, and the
scaling suite always runs sequentially (parallel workers would corrupt the
measurements); --jobs only spreads the oracle suites' independent solves.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .assemble import pid_from_solution
from .channel import BroadcastChannel, reduce_to_channel
from .errors import ValidationError
from .solver import SolverConfig, solve
from .synth import SynthSpec, make_instance

__all__ = ["SUITES", "DEFAULT_SEED", "run_suite"]

SUITES = ("canonical", "coop", "rotation", "doubling", "scaling")
DEFAULT_SEED = 7053

SIGMA2_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)
RHO_GRID = (-0.9, -0.5, 0.0, 0.5, 0.9)
CASES = ("uniq_red", "uniq_syn", "red_syn")
ALPHA_GRID = (0.0, 0.5, 1.0, 2.0, 3.0)
DOUBLING_KS = (2, 4, 8, 16, 32)
DOUBLING_BASE = ("red_syn", 1.0, 0.0)
SWEEP_POINTS = 50

SCALING_SIZES = ((64, 64), (128, 128), (256, 256), (512, 512), (512, 32))
SCALING_DY = 8
TIMING_REPS = 5

ORACLE_TOL_BITS = 1e-8
SWEEP_JUMP_BITS = 0.05
THIN_RATIO = 0.25
SLOPE_LIMIT = 3.4
RUNTIME_LIMITS_S = {
    "canonical": 10.0,
    "coop": 10.0,
    "rotation": 30.0,
    "doubling": 60.0,
    "scaling": 600.0,
}

_LN2 = math.log(2.0)
_SV_EPS = SolverConfig().sv_eps


def _components_bits(pid):
    b = pid.converted("bits")
    return (b.r, b.u1, b.u2, 0.0 if b.s is None else b.s)


def _feas_record(ch, res, pid) -> dict:
    return {
        "max_sv": res.max_sv,
        "min_mi": res.min_mi,
        "i1": ch.i1,
        "i2": ch.i2,
        "ip_total": ch.ip_total,
        "min_raw": min(v for v in pid.raw if v is not None),
        "iterations": res.iterations,
    }


def _solve_spec_point(spec: SynthSpec) -> dict:
    """Worker: solve one synth instance, compare to its oracle if present."""
    inst = make_instance(spec)
    ch = reduce_to_channel(inst.cov)
    res = solve(ch)
    pid = pid_from_solution(ch, res)
    got = _components_bits(pid)
    out = {"pid_bits": got, "feas": _feas_record(ch, res, pid)}
    if inst.oracle is not None:
        want = _components_bits(inst.oracle)
        out["err_bits"] = max(abs(g - w) for g, w in zip(got, want))
    return out


def _doubling_point(k: int) -> dict:
    case, s2, rho = DOUBLING_BASE
    base_spec = SynthSpec("canonical1d", {"case": case, "sigma2": s2, "rho": rho})
    base = _solve_spec_point(base_spec)
    spec = SynthSpec("doubling", {"base": base_spec, "k": k})
    inst = make_instance(spec)
    ch = reduce_to_channel(inst.cov)
    res = solve(ch)
    pid = pid_from_solution(ch, res)
    got = _components_bits(pid)
    err = max(abs(g - k * b) for g, b in zip(got, base["pid_bits"]))
    return {"k": k, "err_bits": err, "feas": _feas_record(ch, res, pid)}


def _map_points(fn, points, jobs: int):
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, points))
    return [fn(p) for p in points]


def _feasibility_criterion(records) -> dict:
    worst_sv = max(r["max_sv"] for r in records)
    worst_lower = min(r["min_mi"] - max(r["i1"], r["i2"]) for r in records)
    uppers = [r["ip_total"] - r["min_mi"] for r in records
              if r["ip_total"] is not None]
    worst_upper = min(uppers) if uppers else math.inf
    worst_raw = min(r["min_raw"] for r in records)
    passed = (
        worst_sv <= 1.0 - _SV_EPS + 1e-15
        and worst_lower >= -1e-7
        and worst_upper >= -1e-7
        and worst_raw >= -1e-7
    )
    return {
        "name": "feasibility",
        "passed": bool(passed),
        "details": {
            "max_sv": worst_sv,
            "sv_cap": 1.0 - _SV_EPS,
            "worst_lower_slack": worst_lower,
            "worst_upper_slack": worst_upper,
            "min_raw_component": worst_raw,
        },
    }


def _oracle_criterion(name: str, errs) -> dict:
    worst = max(errs)
    return {
        "name": name,
        "passed": bool(worst < ORACLE_TOL_BITS),
        "details": {"worst_err_bits": worst, "tol_bits": ORACLE_TOL_BITS,
                    "points": len(errs)},
    }


def _suite_canonical(jobs: int, seed: int):
    specs = [
        SynthSpec("canonical1d", {"case": c, "sigma2": s2, "rho": rho})
        for c in CASES for s2 in SIGMA2_GRID for rho in RHO_GRID
    ]
    results = _map_points(_solve_spec_point, specs, jobs)
    errs = [r["err_bits"] for r in results]
    return [
        _oracle_criterion("canonical_oracle", errs),
        _feasibility_criterion([r["feas"] for r in results]),
    ]


def _suite_coop(jobs: int, seed: int):
    specs = [SynthSpec("coop_gain", {"alpha": a}) for a in ALPHA_GRID]
    results = _map_points(_solve_spec_point, specs, jobs)
    errs = [r["err_bits"] for r in results]
    return [
        _oracle_criterion("coop_oracle", errs),
        _feasibility_criterion([r["feas"] for r in results]),
    ]


def _suite_rotation(jobs: int, seed: int):
    thetas = np.linspace(0.0, math.pi / 2, SWEEP_POINTS)
    specs = [SynthSpec("rotation", {"theta": float(t)}) for t in thetas]
    results = _map_points(_solve_spec_point, specs, jobs)
    end_errs = [r["err_bits"] for r in results if "err_bits" in r]
    curve = np.array([r["pid_bits"] for r in results])
    jump = float(np.abs(np.diff(curve, axis=0)).max())
    return [
        _oracle_criterion("rotation_endpoints", end_errs),
        {
            "name": "rotation_sweep_continuity",
            "passed": bool(jump < SWEEP_JUMP_BITS),
            "details": {"max_adjacent_jump_bits": jump,
                        "limit_bits": SWEEP_JUMP_BITS,
                        "points": len(results),
                        "endpoints_with_oracle": len(end_errs)},
        },
        _feasibility_criterion([r["feas"] for r in results]),
    ]


def _suite_doubling(jobs: int, seed: int):
    results = _map_points(_doubling_point, list(DOUBLING_KS), jobs)
    worst_scaled = max(r["err_bits"] / (1e-7 * r["k"]) for r in results)
    return [
        {
            "name": "doubling_additivity",
            "passed": bool(worst_scaled < 1.0),
            "details": {
                "errs_bits": {str(r["k"]): r["err_bits"] for r in results},
                "tol_bits": "1e-7 * k",
                "worst_over_tol": worst_scaled,
            },
        },
        _feasibility_criterion([r["feas"] for r in results]),
    ]


def _scaling_channel(d1: int, d2: int, seed: int) -> BroadcastChannel:
    """Random gain channel, unit whitened noise, identity target covariance."""
    rng = np.random.Generator(np.random.Philox(seed))
    dy = SCALING_DY
    h1 = rng.standard_normal((d1, dy)) / math.sqrt(dy)
    h2 = rng.standard_normal((d2, dy)) / math.sqrt(dy)

    def mi(*hs):
        g = np.eye(dy) + sum(h.T @ h for h in hs)
        return 0.5 * float(np.linalg.slogdet(g)[1])

    return BroadcastChannel(
        h1=h1, h2=h2, sigma_y=np.eye(dy),
        w1=np.eye(d1), w2=np.eye(d2),
        i1=mi(h1), i2=mi(h2), ip_total=mi(h1, h2),
    )


def _suite_scaling(jobs: int, seed: int):
    # timing: always sequential, monotonic clock, median of 5 after 1 warm-up
    medians = {}
    records = []
    for idx, (d1, d2) in enumerate(SCALING_SIZES):
        ch = _scaling_channel(d1, d2, seed + idx)
        times = []
        for rep in range(TIMING_REPS + 1):
            t0 = time.perf_counter()
            res = solve(ch)
            dt = time.perf_counter() - t0
            if rep > 0:
                times.append(dt)
        pid = pid_from_solution(ch, res)
        records.append(_feas_record(ch, res, pid))
        medians[(d1, d2)] = float(np.median(times))
    square = [(a, medians[(a, b)]) for a, b in SCALING_SIZES if a == b]
    slope = float(np.polyfit(
        np.log([d for d, _ in square]), np.log([t for _, t in square]), 1
    )[0])
    ratio = medians[(512, 32)] / medians[(512, 512)]
    return [
        {
            "name": "scaling_thin_dim",
            "passed": bool(ratio < THIN_RATIO),
            "details": {
                "median_512x32_s": medians[(512, 32)],
                "median_512x512_s": medians[(512, 512)],
                "ratio": ratio,
                "limit": THIN_RATIO,
            },
        },
        {
            "name": "scaling_slope",
            "passed": bool(slope <= SLOPE_LIMIT),
            "details": {
                "medians_s": {f"{a}x{b}": t for (a, b), t in medians.items()},
                "loglog_slope": slope,
                "limit": SLOPE_LIMIT,
            },
        },
        _feasibility_criterion(records),
    ]


_SUITE_FNS = {
    "canonical": _suite_canonical,
    "coop": _suite_coop,
    "rotation": _suite_rotation,
    "doubling": _suite_doubling,
    "scaling": _suite_scaling,
}


def run_suite(name: str, jobs: int = 1, seed: int | None = None) -> dict:
    """Run one suite; returns a gpid-bench-1 report dict."""
    if name not in SUITES:
        raise ValidationError(
            f"unknown suite {name!r}; choose from {', '.join(SUITES)}"
        )
    if jobs < 1:
        raise ValidationError("jobs must be at least 1")
    if seed is None:
        seed = int(os.environ.get("GPID_SEED", DEFAULT_SEED))
    t0 = time.perf_counter()
    criteria = _SUITE_FNS[name](jobs, seed)
    wall = time.perf_counter() - t0
    limit = RUNTIME_LIMITS_S[name]
    criteria.append({
        "name": "runtime",
        "passed": bool(wall < limit),
        "details": {"wall_s": wall, "limit_s": limit},
    })
    return {
        "format": "gpid-bench-1",
        "suite": name,
        "seed": seed,
        "jobs": jobs,
        "criteria": criteria,
        "passed": all(c["passed"] for c in criteria),
    }
