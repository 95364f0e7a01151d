"""Samples CSV: the on-disk boundary shared with the PID estimator CLI.

One header line `x1_0,..,x1_{d1-1},x2_0,..,y_{dy-1}`, then one row per draw,
full-precision decimal floats. Block widths are encoded entirely by the
header, so any tool that writes this shape can feed any tool that reads it;
flowpid deliberately carries its own reader/writer instead of importing the
estimator package.
"""
from __future__ import annotations

import warnings

import numpy as np

from .errors import ValidationError

__all__ = ["sample_columns", "write_samples", "read_samples", "parse_dims"]


def sample_columns(d1: int, d2: int, dy: int) -> list[str]:
    """Canonical CSV header names for the given block widths."""
    return (
        [f"x1_{i}" for i in range(d1)]
        + [f"x2_{i}" for i in range(d2)]
        + [f"y_{i}" for i in range(dy)]
    )


def write_samples(path, values: np.ndarray, dims: tuple[int, int, int]) -> None:
    values = np.asarray(values, dtype=np.float64)
    d1, d2, dy = dims
    if values.ndim != 2 or values.shape[1] != d1 + d2 + dy:
        raise ValidationError(
            f"values shape {values.shape} does not match dims {dims}"
        )
    if not np.isfinite(values).all():
        raise ValidationError("refusing to write non-finite sample values")
    header = ",".join(sample_columns(d1, d2, dy))
    np.savetxt(path, values, delimiter=",", header=header, comments="",
               fmt="%.17g")


def parse_dims(text: str) -> tuple[int, int, int]:
    """Parse a `d1,d2,dy` flag value."""
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"dims must be d1,d2,dy, got {text!r}")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise ValidationError(f"dims must be three integers, got {text!r}")
    if any(d < 1 for d in dims):
        raise ValidationError("dims entries must be positive")
    return dims


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


def read_samples(path) -> tuple[np.ndarray, tuple[int, int, int]]:
    """Parse a samples CSV; returns (values, (d1, d2, dy)) from the header."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise ValidationError(f"{path}: empty file")
        dims = _dims_from_header(header.split(","))
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
    if values.shape[1] != sum(dims):
        raise ValidationError(
            f"{path}: rows have {values.shape[1]} fields, header says "
            f"{sum(dims)}"
        )
    if not np.isfinite(values).all():
        bad = np.argwhere(~np.isfinite(values).all(axis=1)).ravel()[0]
        raise ValidationError(f"{path}: non-finite value in data row {bad}")
    return values, dims
