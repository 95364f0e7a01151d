"""Command-line front end.

Commands: estimate (samples CSV -> PID), solve (covariance JSON -> PID),
synth (benchmark spec -> sample/covariance files), bench (named suite ->
pass/fail report), version.

Exit codes: 0 ok, 2 input error, 3 solver non-convergence (report is still
written), 4 IO error, 5 bench criterion failure. The GPID_SEED environment
variable overrides spec seeds so CI runs are reproducible.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import __version__, bench, io
from .assemble import PidResult, pid_from_solution
from .channel import reduce_to_channel
from .errors import GpidError, ValidationError
from .gauss import estimate_covariance
from .solver import SolverConfig, solve
from .synth import SynthSpec, make_instance, sample_instance

REPORT_FORMAT = "gpid-report-1"
SYNTH_FORMAT = "gpid-synth-1"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3
EXIT_IO = 4
EXIT_BENCH = 5


def _parse_dims(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"--dims must be d1,d2,dy, got {text!r}")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise ValidationError(f"--dims must be three integers, got {text!r}")
    if any(d < 1 for d in dims):
        raise ValidationError("--dims entries must be positive")
    return dims


def _oracle_dict(pid: PidResult) -> dict:
    out = {
        "r": pid.r, "u1": pid.u1, "u2": pid.u2, "s": pid.s,
        "total": pid.total, "unit": pid.unit,
        "i1": pid.i1, "i2": pid.i2, "min_mi": pid.min_mi,
        "ip_total": pid.ip_total, "method": pid.method,
    }
    return out


def _pid_report(input_desc: dict, dims, unit: str, pid: PidResult, res) -> dict:
    pid = pid.converted(unit)
    body = dict(pid.components)
    body["total"] = pid.total
    return {
        "format": REPORT_FORMAT,
        "input": input_desc,
        "dims": {"d1": dims[0], "d2": dims[1], "dy": dims[2]},
        "unit": unit,
        "pid": body,
        "diagnostics": {
            "i1": pid.i1,
            "i2": pid.i2,
            "min_mi": pid.min_mi,
            "ip_total": pid.ip_total,
        },
        "solver": {
            "iterations": res.iterations,
            "converged": res.converged,
            "stop_reason": res.stop_reason,
            "wall_ms": res.wall_ms,
            "kernel": res.kernel,
            "max_sv": res.max_sv,
        },
        "versions": {"tool": __version__, "format": REPORT_FORMAT},
    }


def _emit(doc: dict, out_path) -> None:
    if out_path is None:
        print(json.dumps(doc, sort_keys=True, indent=2, allow_nan=False))
    else:
        io.dump_json(out_path, doc)


def _solver_config(args) -> SolverConfig:
    kwargs = {"kernel": args.kernel}
    if args.max_iters is not None:
        kwargs["max_iters"] = args.max_iters
    return SolverConfig(**kwargs)


def _cmd_estimate(args) -> int:
    samples = io.read_samples(args.samples)
    dims = _parse_dims(args.dims)
    got = (samples.d1, samples.d2, samples.dy)
    if got != dims:
        raise ValidationError(
            f"--dims {dims} does not match file header blocks {got}"
        )
    cov = estimate_covariance(samples)
    ch = reduce_to_channel(cov)
    res = solve(ch, _solver_config(args))
    pid = pid_from_solution(ch, res, allow_unconverged=True)
    report = _pid_report(
        {"kind": "samples", "path": str(args.samples), "n": samples.n},
        dims, args.unit, pid, res,
    )
    _emit(report, args.out)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def _cmd_solve(args) -> int:
    cov = io.read_cov_json(args.cov)
    ch = reduce_to_channel(cov)
    res = solve(ch, _solver_config(args))
    pid = pid_from_solution(ch, res, allow_unconverged=True)
    report = _pid_report(
        {"kind": "covariance", "path": str(args.cov),
         "pairwise_only": cov.pairwise_only},
        (cov.d1, cov.d2, cov.dy), args.unit, pid, res,
    )
    _emit(report, args.out)
    return EXIT_OK if res.converged else EXIT_NONCONVERGED


def _load_spec(text: str) -> SynthSpec:
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"inline spec is not valid JSON: {exc}")
    else:
        doc = io.load_json(text)
    return SynthSpec.from_json_dict(doc)


def _cmd_synth(args) -> int:
    if args.n < 0:
        raise ValidationError("--n must be nonnegative")
    spec = _load_spec(args.spec)
    env_seed = os.environ.get("GPID_SEED")
    if env_seed is not None:
        try:
            spec = dataclasses.replace(spec, seed=int(env_seed))
        except ValueError:
            raise ValidationError(f"GPID_SEED must be an integer, got {env_seed!r}")
    seed = spec.seed
    inst = make_instance(spec)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    oracle = None
    if inst.oracle is not None:
        oracle = _oracle_dict(inst.oracle.converted(args.unit))
    sidecar = {
        "format": SYNTH_FORMAT,
        "spec": spec.to_json_dict(),
        "cov": io.cov_to_json_dict(inst.cov),
        "oracle": oracle,
        "oracle_kind": inst.oracle_kind,
        "versions": {"tool": __version__, "format": SYNTH_FORMAT},
    }
    io.dump_json(out_dir / "instance.json", sidecar)
    if args.n > 0:
        samples = sample_instance(inst, args.n, seed)
        io.write_samples(out_dir / "samples.csv", samples)
    return EXIT_OK


def _cmd_bench(args) -> int:
    report = bench.run_suite(args.suite, jobs=args.jobs)
    _emit(report, args.out)
    if not report["passed"]:
        failed = [c["name"] for c in report["criteria"] if not c["passed"]]
        print(f"gpid bench: failed criteria: {', '.join(failed)}",
              file=sys.stderr)
        return EXIT_BENCH
    return EXIT_OK


def _cmd_version(args) -> int:
    print(f"gpid {__version__}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpid",
        description="Exact partial information decomposition for Gaussian systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--unit", choices=("bits", "nats"), default="bits",
                       help="output unit (default bits)")
        p.add_argument("--out", default=None, metavar="PATH",
                       help="write the JSON report here instead of stdout")
        p.add_argument("--kernel", choices=("auto", "compiled", "python"),
                       default="auto", help="solver inner-loop implementation")
        p.add_argument("--max-iters", type=int, default=None, metavar="N",
                       help="iteration cap for the solver")

    p = sub.add_parser("estimate", help="PID from a samples CSV")
    p.add_argument("--samples", required=True, metavar="FILE")
    p.add_argument("--dims", required=True, metavar="D1,D2,DY")
    add_common(p)
    p.set_defaults(fn=_cmd_estimate)

    p = sub.add_parser("solve", help="PID from a covariance JSON")
    p.add_argument("--cov", required=True, metavar="FILE")
    add_common(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("synth", help="generate a benchmark instance")
    p.add_argument("--spec", required=True, metavar="FILE_OR_JSON",
                   help="SynthSpec JSON file path, or inline JSON")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--n", type=int, default=0,
                   help="sample rows to draw (0 = covariance sidecar only)")
    p.add_argument("--unit", choices=("bits", "nats"), default="bits")
    p.set_defaults(fn=_cmd_synth)

    p = sub.add_parser("bench", help="run a benchmark suite")
    p.add_argument("--suite", required=True, choices=bench.SUITES)
    p.add_argument("--out", default=None, metavar="PATH")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for independent instances "
                        "(timing suites always run sequentially)")
    p.set_defaults(fn=_cmd_bench)

    p = sub.add_parser("version", help="print the tool version")
    p.set_defaults(fn=_cmd_version)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches our input-error code
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except GpidError as exc:
        print(f"gpid: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"gpid: io error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
