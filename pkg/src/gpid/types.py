"""Core value types: sample matrices, covariance models, Cholesky factors.

Everything is immutable after construction (arrays are copied and marked
read-only) so values can be shared freely across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError

__all__ = ["SampleMatrix", "CovarianceModel", "SpdFactor"]


def _frozen_array(a, dtype=np.float64):
    out = np.array(a, dtype=dtype, order="C", copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """n rows of (X1-block, X2-block, Y-block) 64-bit float samples.

    Parameters
    ----------
    d1, d2, dy : int
        Column widths of the three blocks, in order X1, X2, Y.
    values : (n, d1+d2+dy) ndarray
        One sample per row; all entries finite.
    """

    d1: int
    d2: int
    dy: int
    values: np.ndarray

    def __post_init__(self):
        for name, d in (("d1", self.d1), ("d2", self.d2), ("dy", self.dy)):
            if not isinstance(d, (int, np.integer)) or d < 1:
                raise ValidationError(f"{name} must be a positive integer, got {d!r}")
        values = _frozen_array(self.values)
        if values.ndim != 2:
            raise ValidationError(f"values must be 2-d, got shape {values.shape}")
        if values.shape[0] < 1:
            raise ValidationError("need at least one sample row")
        width = self.d1 + self.d2 + self.dy
        if values.shape[1] != width:
            raise ValidationError(
                f"values has {values.shape[1]} columns, expected d1+d2+dy = {width}"
            )
        finite = np.isfinite(values)
        if not finite.all():
            row = int(np.argmin(finite.all(axis=1)))
            raise ValidationError(f"non-finite value in sample row {row}")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def x1(self) -> np.ndarray:
        return self.values[:, : self.d1]

    @property
    def x2(self) -> np.ndarray:
        return self.values[:, self.d1 : self.d1 + self.d2]

    @property
    def y(self) -> np.ndarray:
        return self.values[:, self.d1 + self.d2 :]


# Symmetry is checked relative to the largest entry; PSD relative to the
# mean diagonal scale, so the same model validates at any overall scaling.
_SYM_RTOL = 1e-12
_PSD_EIG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class CovarianceModel:
    """Second-moment description of the joint (X1, X2, Y).

    `sigma` is the full (d1+d2+dy)-square matrix in block order X1, X2, Y.
    When `pairwise_only` is true the X1-X2 cross block is unknown: it is
    stored as zeros, ignored by consumers, and excluded from the PSD check
    (the two pairwise joints are validated instead).
    """

    d1: int
    d2: int
    dy: int
    mean: np.ndarray
    sigma: np.ndarray
    pairwise_only: bool = False

    def __post_init__(self):
        for name, d in (("d1", self.d1), ("d2", self.d2), ("dy", self.dy)):
            if not isinstance(d, (int, np.integer)) or d < 1:
                raise ValidationError(f"{name} must be a positive integer, got {d!r}")
        d = self.d1 + self.d2 + self.dy
        mean = _frozen_array(self.mean)
        if mean.shape != (d,):
            raise ValidationError(f"mean has shape {mean.shape}, expected ({d},)")
        sigma = np.array(self.sigma, dtype=np.float64, copy=True)
        if sigma.shape != (d, d):
            raise ValidationError(f"sigma has shape {sigma.shape}, expected ({d}, {d})")
        if not np.isfinite(sigma).all() or not np.isfinite(mean).all():
            raise ValidationError("covariance model contains non-finite values")
        scale = np.abs(sigma).max()
        if scale > 0 and np.abs(sigma - sigma.T).max() > _SYM_RTOL * scale:
            raise ValidationError("sigma is asymmetric beyond tolerance")
        sigma = (sigma + sigma.T) / 2.0
        sigma.flags.writeable = False
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "pairwise_only", bool(self.pairwise_only))
        self._check_psd()

    def _check_psd(self):
        if self.pairwise_only:
            blocks = [self.pairwise_joint(1), self.pairwise_joint(2)]
        else:
            blocks = [self.sigma]
        for block in blocks:
            tol = _PSD_EIG_TOL * max(1.0, np.trace(block) / block.shape[0])
            min_eig = float(np.linalg.eigvalsh(block)[0])
            if min_eig < -tol:
                raise ValidationError(
                    f"covariance not PSD: min eigenvalue {min_eig:.3e} < -{tol:.3e}"
                )
        sy = self.sigma_y
        if float(np.linalg.eigvalsh(sy)[0]) <= 0.0:
            raise ValidationError("sigma_y block is not strictly positive definite")

    # block views -----------------------------------------------------
    @property
    def sigma_x1(self) -> np.ndarray:
        return self.sigma[: self.d1, : self.d1]

    @property
    def sigma_x2(self) -> np.ndarray:
        return self.sigma[self.d1 : self.d1 + self.d2, self.d1 : self.d1 + self.d2]

    @property
    def sigma_y(self) -> np.ndarray:
        return self.sigma[self.d1 + self.d2 :, self.d1 + self.d2 :]

    @property
    def cross_x1y(self) -> np.ndarray:
        return self.sigma[: self.d1, self.d1 + self.d2 :]

    @property
    def cross_x2y(self) -> np.ndarray:
        return self.sigma[self.d1 : self.d1 + self.d2, self.d1 + self.d2 :]

    @property
    def cross_x1x2(self) -> np.ndarray:
        return self.sigma[: self.d1, self.d1 : self.d1 + self.d2]

    def pairwise_joint(self, which: int) -> np.ndarray:
        """Joint covariance of (X_which, Y) as a dense matrix."""
        if which == 1:
            idx = np.r_[0 : self.d1, self.d1 + self.d2 : self.d1 + self.d2 + self.dy]
        elif which == 2:
            idx = np.r_[self.d1 : self.d1 + self.d2 + self.dy]
        else:
            raise ValidationError(f"which must be 1 or 2, got {which}")
        return self.sigma[np.ix_(idx, idx)]

    @staticmethod
    def from_blocks(sx1, sx2, sy, c1y, c2y, c12=None, mean=None) -> "CovarianceModel":
        """Assemble a model from its six blocks (c12=None means pairwise-only)."""
        sx1 = np.atleast_2d(np.asarray(sx1, dtype=np.float64))
        sx2 = np.atleast_2d(np.asarray(sx2, dtype=np.float64))
        sy = np.atleast_2d(np.asarray(sy, dtype=np.float64))
        d1, d2, dy = sx1.shape[0], sx2.shape[0], sy.shape[0]
        c1y = np.asarray(c1y, dtype=np.float64).reshape(d1, dy)
        c2y = np.asarray(c2y, dtype=np.float64).reshape(d2, dy)
        pairwise = c12 is None
        c12 = np.zeros((d1, d2)) if pairwise else np.asarray(c12, dtype=np.float64).reshape(d1, d2)
        d = d1 + d2 + dy
        sigma = np.zeros((d, d))
        sigma[:d1, :d1] = sx1
        sigma[d1 : d1 + d2, d1 : d1 + d2] = sx2
        sigma[d1 + d2 :, d1 + d2 :] = sy
        sigma[:d1, d1 + d2 :] = c1y
        sigma[d1 + d2 :, :d1] = c1y.T
        sigma[d1 : d1 + d2, d1 + d2 :] = c2y
        sigma[d1 + d2 :, d1 : d1 + d2] = c2y.T
        sigma[:d1, d1 : d1 + d2] = c12
        sigma[d1 : d1 + d2, :d1] = c12.T
        if mean is None:
            mean = np.zeros(d)
        return CovarianceModel(d1, d2, dy, mean, sigma, pairwise_only=pairwise)


@dataclass(frozen=True, eq=False)
class SpdFactor:
    """Lower Cholesky factor of an SPD matrix plus its log-determinant."""

    dim: int
    lower: np.ndarray
    logdet: float

    @staticmethod
    def from_matrix(a: np.ndarray) -> "SpdFactor":
        a = np.asarray(a, dtype=np.float64)
        try:
            lower = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"matrix is not positive definite: {exc}") from exc
        logdet = 2.0 * float(np.sum(np.log(np.diag(lower))))
        lower = _frozen_array(lower)
        return SpdFactor(dim=a.shape[0], lower=lower, logdet=logdet)
