"""Specialized-interaction datasets with a discrete target.

Three latent concept vectors z1, z2, zc in R^50 are drawn i.i.d. N(0, 0.5^2).
The modalities mix the unique and common concepts through fixed random
matrices, identically for every task:

    X1 = T1 [z1, zc],    X2 = T2 [z2, zc],    T1, T2 in R^100x100.

The binary label thresholds a score computed from task-weighted concepts
through a fixed random tanh feature bank with a fixed 10% dropout mask:

    score = mean(mask * tanh(W [w1 z1, w2 z2, wc zc]))
    Y = 1 if sigmoid(score) >= 0.5 else 0    (i.e. score >= 0).

Only the weights (w1, w2, wc) differ between tasks, so the modalities are
byte-identical across the family for a given seed and the tasks differ purely
in what the label depends on: zc only (redundant), z1 or z2 only (unique),
z1 and z2 jointly (synergistic: neither score summand determines the sign of
their sum alone), plus six mixtures with half weights.

Everything -- T1, T2, the feature bank, the dropout mask, and the concept
draws -- comes from one seeded generator, so a fixed seed reproduces files
byte for byte.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import data as dataio
from .errors import ValidationError

__all__ = ["TASKS", "LATENT_DIM", "X_DIM", "generate", "write_dataset",
           "SYNTH_FORMAT"]

SYNTH_FORMAT = "flowpid-synth-1"

LATENT_DIM = 50
X_DIM = 2 * LATENT_DIM
SIGMA_Z = 0.5
FEATURES = 150
DROPOUT = 0.1

# task name -> weights on (z1, z2, zc); 0.5 marks the half-weight variants
TASKS = {
    "D_R": (0.0, 0.0, 1.0),
    "D_U1": (1.0, 0.0, 0.0),
    "D_U2": (0.0, 1.0, 0.0),
    "D_S": (1.0, 1.0, 0.0),
    "mix_z1_z2h_zch": (1.0, 0.5, 0.5),
    "mix_z1_z2_zch": (1.0, 1.0, 0.5),
    "mix_z1h_z2h_zc": (0.5, 0.5, 1.0),
    "mix_z1h_z2h_zch": (0.5, 0.5, 0.5),
    "mix_z2h_zch": (0.0, 0.5, 0.5),
    "mix_z2h_zc": (0.0, 0.5, 1.0),
}

DIMS = (X_DIM, X_DIM, 1)


def _family(rng: np.random.Generator):
    """Fixed per-seed pieces shared by every task: mixers, features, mask."""
    t1 = rng.standard_normal((X_DIM, 2 * LATENT_DIM))
    t2 = rng.standard_normal((X_DIM, 2 * LATENT_DIM))
    w = rng.standard_normal((FEATURES, 3 * LATENT_DIM)) / math.sqrt(3 * LATENT_DIM)
    mask = (rng.random(FEATURES) >= DROPOUT).astype(np.float64)
    return t1, t2, w, mask


def generate(task: str, n: int, seed: int) -> tuple[np.ndarray, dict]:
    """Draw one task's samples; returns (values (n, 201), sidecar metadata).

    The family parameters are drawn before the concept vectors and the task
    only reweights the score inputs, so the same seed and n yield identical
    X1, X2 across all tasks.
    """
    if task not in TASKS:
        raise ValidationError(
            f"unknown task {task!r}; known: {', '.join(TASKS)}"
        )
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    t1, t2, w, mask = _family(rng)
    z1 = rng.normal(0.0, SIGMA_Z, size=(n, LATENT_DIM))
    z2 = rng.normal(0.0, SIGMA_Z, size=(n, LATENT_DIM))
    zc = rng.normal(0.0, SIGMA_Z, size=(n, LATENT_DIM))

    x1 = np.hstack([z1, zc]) @ t1.T
    x2 = np.hstack([z2, zc]) @ t2.T
    w1, w2, wc = TASKS[task]
    weighted = np.hstack([w1 * z1, w2 * z2, wc * zc])
    score = (np.tanh(weighted @ w.T) * mask).mean(axis=1)
    # sigmoid(score) >= 0.5 is exactly score >= 0
    label = (score >= 0.0).astype(np.float64)

    values = np.hstack([x1, x2, label[:, None]])
    meta = {
        "format": SYNTH_FORMAT,
        "task": task,
        "weights": {"z1": w1, "z2": w2, "zc": wc},
        "dims": {"d1": DIMS[0], "d2": DIMS[1], "dy": DIMS[2]},
        "n": n,
        "seed": seed,
        "label_mean": float(label.mean()),
    }
    return values, meta


def write_dataset(out_dir, task: str, n: int, seed: int) -> tuple[str, str]:
    """Write <task>.csv and <task>.json under out_dir; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    values, meta = generate(task, n, seed)
    csv_path = out / f"{task}.csv"
    json_path = out / f"{task}.json"
    dataio.write_samples(csv_path, values, DIMS)
    with open(json_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return str(csv_path), str(json_path)
