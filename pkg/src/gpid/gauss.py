"""Gaussian moment arithmetic: covariance MLE, PSD hygiene, whitening, entropy, MI.

All information quantities are computed and returned in nats; callers convert
to bits at the reporting boundary (divide by ln 2). Log-determinants always go
through Cholesky factors, never determinant products, so dimensions in the
hundreds cannot overflow.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericalError, ValidationError
from .types import CovarianceModel, SampleMatrix, SpdFactor

__all__ = [
    "LN2",
    "estimate_covariance",
    "psd_repair",
    "whiten_transform",
    "gaussian_entropy",
    "gaussian_mi",
    "mi_from_model",
    "total_mi_from_model",
]

LN2 = float(np.log(2.0))


def estimate_covariance(samples: SampleMatrix) -> CovarianceModel:
    """Maximum-likelihood mean and covariance of a sample matrix.

    Uses the 1/n normalization (the MLE), not the 1/(n-1) unbiased variant.

    Parameters
    ----------
    samples : SampleMatrix
        At least two rows.

    Returns
    -------
    CovarianceModel
        Full-joint model; `sigma` is exactly symmetric by construction.
    """
    if samples.n < 2:
        raise ValidationError(f"need n >= 2 samples to estimate covariance, got {samples.n}")
    values = samples.values
    mean = values.mean(axis=0)
    centered = values - mean
    sigma = centered.T @ centered / samples.n
    sigma = (sigma + sigma.T) / 2.0
    return CovarianceModel(samples.d1, samples.d2, samples.dy, mean, sigma)


def psd_repair(matrix: np.ndarray, floor: float | None = None) -> np.ndarray:
    """Clip the eigenvalues of a symmetric matrix from below.

    Parameters
    ----------
    matrix : (d, d) ndarray
        Symmetric within 1e-12 relative tolerance.
    floor : float, optional
        Eigenvalue floor; defaults to 1e-10 * trace/d (scale-relative).

    Returns
    -------
    (d, d) ndarray
        The input itself when its minimum eigenvalue already meets the floor,
        otherwise the eigenvalue-clipped reconstruction (symmetric PSD).
    """
    a = np.asarray(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.T).max() > 1e-12 * scale:
        raise ValidationError("matrix is asymmetric beyond tolerance")
    if floor is None:
        floor = 1e-10 * float(np.trace(a)) / a.shape[0]
    if floor < 0:
        raise ValidationError(f"floor must be nonnegative, got {floor}")
    w, v = np.linalg.eigh(a)
    if w[0] >= floor:
        return a
    w = np.maximum(w, floor)
    out = (v * w) @ v.T
    return (out + out.T) / 2.0


def whiten_transform(sigma: np.ndarray) -> np.ndarray:
    """Inverse symmetric square root W of an SPD matrix, so W sigma W^T = I.

    The eigendecomposition route makes W unique and symmetric; any other
    whitening differs by an orthogonal factor and yields the same MIs.
    """
    a = np.asarray(sigma, dtype=np.float64)
    w, v = np.linalg.eigh((a + a.T) / 2.0)
    if w[0] <= 0.0:
        raise NumericalError(
            f"cannot whiten: matrix is singular (min eigenvalue {w[0]:.3e})"
        )
    return (v / np.sqrt(w)) @ v.T


def gaussian_entropy(sigma: np.ndarray) -> float:
    """Differential entropy of N(mu, sigma) in nats: d/2 ln(2 pi) + 1/2 logdet + d/2."""
    a = np.atleast_2d(np.asarray(sigma, dtype=np.float64))
    d = a.shape[0]
    factor = SpdFactor.from_matrix(a)
    return 0.5 * d * np.log(2.0 * np.pi) + 0.5 * factor.logdet + 0.5 * d


def gaussian_mi(sigma: np.ndarray, split: int) -> float:
    """Mutual information I(A;B) of a jointly Gaussian pair, in nats.

    Parameters
    ----------
    sigma : (da+db, da+db) ndarray
        Joint covariance with the A block leading.
    split : int
        Width of the A block.

    Returns
    -------
    float
        0.5 (logdet S_A + logdet S_B - logdet S_AB), clamped to 0 from below
        (round-off can leave values in (-1e-10, 0)).
    """
    a = np.asarray(sigma, dtype=np.float64)
    if not 0 < split < a.shape[0]:
        raise ValidationError(f"split {split} outside matrix of size {a.shape[0]}")
    ld_a = SpdFactor.from_matrix(a[:split, :split]).logdet
    ld_b = SpdFactor.from_matrix(a[split:, split:]).logdet
    ld_ab = SpdFactor.from_matrix(a).logdet
    mi = 0.5 * (ld_a + ld_b - ld_ab)
    return max(mi, 0.0)


def mi_from_model(cov: CovarianceModel, which: int) -> float:
    """I(X_which; Y) in nats from a covariance model's pairwise joint."""
    joint = cov.pairwise_joint(which)
    split = cov.d1 if which == 1 else cov.d2
    return gaussian_mi(joint, split)


def total_mi_from_model(cov: CovarianceModel) -> float:
    """I(X1, X2; Y) in nats; requires the full joint."""
    if cov.pairwise_only:
        raise ValidationError("total MI needs the X1-X2 cross block (full joint)")
    return gaussian_mi(cov.sigma, cov.d1 + cov.d2)
