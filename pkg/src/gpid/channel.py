"""Reduction of a covariance model to the whitened two-user broadcast channel.

The channel form is X_i = H_i Y + n_i with Cov(n_i) = I after per-receiver
whitening; the X1-X2 dependence left unspecified by pairwise marginals is
exactly the noise cross-covariance the solver optimizes over.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ModelError, NumericalError
from .gauss import mi_from_model, psd_repair, total_mi_from_model, whiten_transform
from .types import CovarianceModel, _frozen_array

__all__ = ["BroadcastChannel", "NoiseCrossCov", "reduce_to_channel", "true_noise_cross_cov"]

# Noise covariances slightly indefinite from round-off are repaired; anything
# below -1e-6 * trace/d means the pairwise marginals themselves are inconsistent.
_NOISE_EIG_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class BroadcastChannel:
    """Whitened channel gains plus precomputed marginal MIs.

    h1, h2 are the whitened gains (d_i x dy); w1, w2 the whitening maps that
    produced them (kept for diagnostics); i1, i2 the marginal MIs I(X_i; Y) in
    nats; ip_total is I(X1,X2;Y) in nats when the source model had a full
    joint, else None.
    """

    h1: np.ndarray
    h2: np.ndarray
    sigma_y: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    i1: float
    i2: float
    ip_total: float | None = None

    def __post_init__(self):
        for name in ("h1", "h2", "sigma_y", "w1", "w2"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        if self.h1.shape[1] != self.sigma_y.shape[0] or self.h2.shape[1] != self.sigma_y.shape[0]:
            raise ModelError("gain column counts must match dim(Y)")
        if self.i1 < 0 or self.i2 < 0:
            raise ModelError(f"marginal MIs must be nonnegative, got ({self.i1}, {self.i2})")

    @property
    def d1(self) -> int:
        return self.h1.shape[0]

    @property
    def d2(self) -> int:
        return self.h2.shape[0]

    @property
    def dy(self) -> int:
        return self.sigma_y.shape[0]


@dataclass(frozen=True, eq=False)
class NoiseCrossCov:
    """The data's own whitened noise cross-covariance (d1 x d2)."""

    off: np.ndarray

    def __post_init__(self):
        off = _frozen_array(self.off)
        object.__setattr__(self, "off", off)
        sv_max = float(np.linalg.norm(off, 2)) if off.size else 0.0
        if sv_max > 1.0 + 1e-6:
            raise ModelError(
                f"noise cross-covariance infeasible: spectral norm {sv_max:.8f} > 1"
            )


def _reduce_one(cov: CovarianceModel, which: int):
    """Whitened gain and whitening map for one receiver."""
    sy = cov.sigma_y
    sx = cov.sigma_x1 if which == 1 else cov.sigma_x2
    cxy = cov.cross_x1y if which == 1 else cov.cross_x2y
    try:
        gain = np.linalg.solve(sy, cxy.T).T  # Sigma_XY Sigma_Y^-1
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"sigma_y block is singular: {exc}") from exc
    noise = sx - gain @ sy @ gain.T
    noise = (noise + noise.T) / 2.0
    d = noise.shape[0]
    min_eig = float(np.linalg.eigvalsh(noise)[0])
    tol = _NOISE_EIG_TOL * max(1.0, np.trace(noise) / d)
    if min_eig < -tol:
        raise ModelError(
            f"marginals of X{which} are inconsistent: noise covariance has "
            f"eigenvalue {min_eig:.3e} beyond repair tolerance {-tol:.3e}"
        )
    noise = psd_repair(noise, floor=1e-10 * max(1.0, np.trace(noise) / d))
    w = whiten_transform(noise)
    return w @ gain, w, gain


def reduce_to_channel(cov: CovarianceModel) -> BroadcastChannel:
    """Reduce a covariance model to whitened broadcast-channel form.

    The pre-whitening gains are H~_i = Sigma_{XiY} Sigma_Y^{-1}; the implied
    noise Sigma_{Xi} - H~_i Sigma_Y H~_i^T is repaired and whitened to the
    identity, and H_i = W_i H~_i.
    """
    min_eig_y = float(np.linalg.eigvalsh(cov.sigma_y)[0])
    if min_eig_y <= 0.0:
        raise NumericalError(
            f"sigma_y block is singular (min eigenvalue {min_eig_y:.3e})"
        )
    h1, w1, _ = _reduce_one(cov, 1)
    h2, w2, _ = _reduce_one(cov, 2)
    i1 = mi_from_model(cov, 1)
    i2 = mi_from_model(cov, 2)
    ip_total = None if cov.pairwise_only else total_mi_from_model(cov)
    return BroadcastChannel(
        h1=h1, h2=h2, sigma_y=cov.sigma_y, w1=w1, w2=w2, i1=i1, i2=i2, ip_total=ip_total
    )


def true_noise_cross_cov(cov: CovarianceModel, ch: BroadcastChannel) -> NoiseCrossCov:
    """Whitened noise cross-covariance implied by the full joint.

    Feeding the result into the solver objective reproduces 2 * ip_total; it
    is the feasible point realized by the data's own coupling.
    """
    if cov.pairwise_only:
        raise ContractError("noise cross-covariance needs the full joint (pairwise-only model)")
    gain1 = np.linalg.solve(cov.sigma_y, cov.cross_x1y.T).T
    gain2 = np.linalg.solve(cov.sigma_y, cov.cross_x2y.T).T
    off = cov.cross_x1x2 - gain1 @ cov.sigma_y @ gain2.T
    return NoiseCrossCov(off=ch.w1 @ off @ ch.w2.T)
