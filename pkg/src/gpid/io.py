"""File formats: samples CSV, covariance JSON, and JSON report helpers.

These formats are the package's cross-tool boundary (anything that can write
a CSV of samples or a gpid-cov-1 JSON can drive the CLI), so parsing is
strict: unknown keys, bad headers, and non-finite values are rejected with
messages that name the offending row or field.

Samples CSV: one header line `x1_0,..,x1_{d1-1},x2_0,..,y_{dy-1}`, then one
row per draw, full-precision decimal floats (round-trips float64 exactly).

Covariance JSON: object with format tag "gpid-cov-1", block dims, mean, and
the full row-major sigma; `pairwise_only: true` marks the X1-X2 cross block
as unknown.
"""
from __future__ import annotations

import json
import warnings

import numpy as np

from .errors import ValidationError
from .types import CovarianceModel, SampleMatrix

__all__ = [
    "COV_FORMAT",
    "sample_columns",
    "write_samples",
    "read_samples",
    "cov_to_json_dict",
    "write_cov_json",
    "read_cov_json",
    "dump_json",
    "load_json",
]

COV_FORMAT = "gpid-cov-1"


def sample_columns(d1: int, d2: int, dy: int) -> list[str]:
    """Canonical CSV header names for the given block widths."""
    return (
        [f"x1_{i}" for i in range(d1)]
        + [f"x2_{i}" for i in range(d2)]
        + [f"y_{i}" for i in range(dy)]
    )


def write_samples(path, samples: SampleMatrix) -> None:
    header = ",".join(sample_columns(samples.d1, samples.d2, samples.dy))
    np.savetxt(path, samples.values, delimiter=",", header=header,
               comments="", fmt="%.17g")


def _dims_from_header(names: list[str]) -> tuple[int, int, int]:
    dims = []
    pos = 0
    for prefix in ("x1", "x2", "y"):
        d = 0
        while pos < len(names) and names[pos] == f"{prefix}_{d}":
            d += 1
            pos += 1
        dims.append(d)
    if pos != len(names) or min(dims) < 1:
        raise ValidationError(
            "malformed samples header; expected x1_0..x1_{d1-1},x2_0..,y_0.. "
            f"got {','.join(names[:8])}{',...' if len(names) > 8 else ''}"
        )
    return tuple(dims)


def read_samples(path) -> SampleMatrix:
    """Parse a samples CSV; block widths come from the header names."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValidationError(f"{path}: empty file")
        d1, d2, dy = _dims_from_header(header.split(","))
        try:
            with warnings.catch_warnings():
                # empty input warns before returning a 0-row array; the
                # explicit size check below is the real diagnostic
                warnings.simplefilter("ignore", UserWarning)
                values = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from exc
    if values.size == 0:
        raise ValidationError(f"{path}: no sample rows")
    if values.shape[1] != d1 + d2 + dy:
        raise ValidationError(
            f"{path}: rows have {values.shape[1]} fields, header says "
            f"{d1 + d2 + dy}"
        )
    try:
        return SampleMatrix(d1=d1, d2=d2, dy=dy, values=values)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def cov_to_json_dict(cov: CovarianceModel) -> dict:
    return {
        "format": COV_FORMAT,
        "d1": cov.d1,
        "d2": cov.d2,
        "dy": cov.dy,
        "mean": cov.mean.tolist(),
        "sigma": cov.sigma.ravel().tolist(),
        "pairwise_only": cov.pairwise_only,
    }


def write_cov_json(path, cov: CovarianceModel) -> None:
    dump_json(path, cov_to_json_dict(cov))


def read_cov_json(path) -> CovarianceModel:
    doc = load_json(path)
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: covariance file must hold a JSON object")
    if doc.get("format") != COV_FORMAT:
        raise ValidationError(
            f"{path}: format tag {doc.get('format')!r}, expected {COV_FORMAT!r}"
        )
    required = {"format", "d1", "d2", "dy", "mean", "sigma"}
    allowed = required | {"pairwise_only"}
    missing = required - set(doc)
    extra = set(doc) - allowed
    if missing or extra:
        raise ValidationError(
            f"{path}: missing keys {sorted(missing)}, unexpected {sorted(extra)}"
        )
    dims = []
    for key in ("d1", "d2", "dy"):
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ValidationError(f"{path}: {key} must be a positive integer")
        dims.append(v)
    d = sum(dims)
    mean = doc["mean"]
    sigma = doc["sigma"]
    if not isinstance(mean, list) or len(mean) != d:
        raise ValidationError(f"{path}: mean must be a list of length {d}")
    if not isinstance(sigma, list) or len(sigma) != d * d:
        raise ValidationError(
            f"{path}: sigma must be a row-major list of length {d * d}"
        )
    pairwise = doc.get("pairwise_only", False)
    if not isinstance(pairwise, bool):
        raise ValidationError(f"{path}: pairwise_only must be a boolean")
    try:
        return CovarianceModel(
            d1=dims[0], d2=dims[1], dy=dims[2],
            mean=np.asarray(mean, dtype=np.float64),
            sigma=np.asarray(sigma, dtype=np.float64).reshape(d, d),
            pairwise_only=pairwise,
        )
    except (ValidationError, ValueError, TypeError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def dump_json(path, obj) -> None:
    """Stable rendering: sorted keys, two-space indent, trailing newline."""
    text = json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text + "\n")


def load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
