"""Command-line front end: train flows, export latents, generate datasets.

Exit codes: 0 ok, 2 input error, 3 training divergence, 4 IO error. The
`train` and `synth-specialized` commands print a small JSON summary; `export`
prints the output path.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from . import data as dataio
from . import synth
from .errors import TrainingError, ValidationError
from .flows import FlowConfig
from .train import (
    TrainRecipe,
    export_latents,
    load_checkpoint,
    save_checkpoint,
    train,
)

__all__ = ["main", "EXIT_OK", "EXIT_INPUT", "EXIT_TRAIN", "EXIT_IO"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_TRAIN = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowpid",
        description="train coupling flows that Gaussianize samples and "
        "export latents in the PID estimator's CSV format",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit flows to a samples CSV")
    p.add_argument("--data", required=True, metavar="FILE")
    p.add_argument("--dims", required=True, metavar="D1,D2,DY",
                   help="expected block widths; must match the CSV header")
    p.add_argument("--epochs", required=True, type=int, metavar="E")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--out", required=True, metavar="DIR",
                   help="checkpoint directory (created if missing)")
    p.add_argument("--blocks", type=int, default=6, metavar="N")
    p.add_argument("--hidden", type=int, default=64, metavar="N")
    p.add_argument("--batch", type=int, default=128, metavar="N")
    p.add_argument("--lr", type=float, default=1e-4, metavar="LR")

    p = sub.add_parser("export", help="apply a checkpoint to a samples CSV")
    p.add_argument("--ckpt", required=True, metavar="DIR")
    p.add_argument("--data", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")

    p = sub.add_parser("synth-specialized",
                       help="generate a discrete-target interaction dataset")
    p.add_argument("--task", required=True,
                   choices=sorted(synth.TASKS) + ["all"])
    p.add_argument("--n", required=True, type=int, metavar="N")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--out", required=True, metavar="DIR")

    sub.add_parser("version", help="print the tool version")
    return parser


def _cmd_train(args) -> int:
    values, file_dims = dataio.read_samples(args.data)
    dims = dataio.parse_dims(args.dims)
    if dims != file_dims:
        raise ValidationError(
            f"--dims {dims} does not match file header blocks {file_dims}"
        )
    cfg = FlowConfig(d1=dims[0], d2=dims[1], dy=dims[2],
                     blocks=args.blocks, hidden=args.hidden)
    recipe = TrainRecipe(epochs=args.epochs, lr0=args.lr, batch=args.batch,
                         seed=args.seed)
    result = train(values, cfg, recipe)
    save_checkpoint(args.out, result)
    print(json.dumps({
        "checkpoint": args.out,
        "epochs": recipe.epochs,
        "first_epoch_loss": result.loss_curve[0],
        "final_epoch_loss": result.loss_curve[-1],
    }, sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_export(args) -> int:
    result = load_checkpoint(args.ckpt)
    values, file_dims = dataio.read_samples(args.data)
    if file_dims != result.cfg.dims:
        raise ValidationError(
            f"data blocks {file_dims} do not match checkpoint dims "
            f"{result.cfg.dims}"
        )
    export_latents(result, values, args.out)
    print(args.out)
    return EXIT_OK


def _cmd_synth(args) -> int:
    tasks = sorted(synth.TASKS) if args.task == "all" else [args.task]
    written = {}
    for task in tasks:
        csv_path, json_path = synth.write_dataset(args.out, task, args.n,
                                                  args.seed)
        written[task] = {"samples": csv_path, "meta": json_path}
    print(json.dumps({"n": args.n, "seed": args.seed, "written": written},
                     sort_keys=True, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "export":
            return _cmd_export(args)
        if args.command == "synth-specialized":
            return _cmd_synth(args)
        if args.command == "version":
            print(__version__)
            return EXIT_OK
        raise AssertionError(f"unhandled command {args.command!r}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
