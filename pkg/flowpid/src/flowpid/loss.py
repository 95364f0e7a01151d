"""Gaussian-marginal training loss.

Each (latent X-block, latent Y-block) pair is scored by the negative Gaussian
log-likelihood of the concatenated latents under the batch's own
maximum-likelihood fit (mean and 1/n covariance), minus the mean
log-determinants of the two flows. Minimizing this drives each pair toward
the Gaussian family while the log-det terms stop the flows from cheating by
collapsing scale: shrinking latents lowers the NLL term and raises the
log-det term by exactly the same amount, so the loss is invariant to the
reparameterization.

Gradients flow through the MLE mean and covariance; they are functions of
the batch, not frozen statistics.
"""
from __future__ import annotations

import math
import warnings

import torch

from .errors import ValidationError

__all__ = ["gaussian_nll", "marginal_loss", "flow_loss"]

# relative floor added to a singular batch covariance's diagonal
_REPAIR_FLOOR = 1e-6
_REPAIR_TRIES = 8


def gaussian_nll(z: torch.Tensor) -> torch.Tensor:
    """Mean per-sample negative log-likelihood under the batch MLE fit.

    The fit is mu = batch mean, sigma = centered second moment (1/n). A
    Cholesky failure means the batch covariance is singular; the diagonal is
    floored (relative to its mean, escalating tenfold on repeat failures)
    and a RuntimeWarning is emitted.
    """
    if z.ndim != 2:
        raise ValidationError(f"latents must be 2-d, got shape {tuple(z.shape)}")
    n, d = z.shape
    if n < 2:
        raise ValidationError(f"covariance fit needs a batch of >= 2 rows, got {n}")
    mu = z.mean(dim=0)
    centered = z - mu
    sigma = centered.T @ centered / n
    scale = max(float(sigma.diagonal().mean().detach()), 1.0)
    floor = _REPAIR_FLOOR * scale
    chol, info = torch.linalg.cholesky_ex(sigma)
    for _ in range(_REPAIR_TRIES):
        if int(info) == 0:
            break
        warnings.warn(
            f"singular batch covariance; flooring diagonal by {floor:.3g}",
            RuntimeWarning,
            stacklevel=2,
        )
        sigma = sigma + floor * torch.eye(d, dtype=z.dtype, device=z.device)
        floor *= 10.0
        chol, info = torch.linalg.cholesky_ex(sigma)
    if int(info) != 0:
        raise ValidationError("batch covariance is not repairable")
    logdet = 2.0 * torch.log(chol.diagonal()).sum()
    half = torch.linalg.solve_triangular(chol, centered.T, upper=False)
    quad = (half * half).sum() / n
    return 0.5 * (d * math.log(2.0 * math.pi) + logdet + quad)


def marginal_loss(
    zx: torch.Tensor,
    zy: torch.Tensor,
    logdet_x: torch.Tensor,
    logdet_y: torch.Tensor,
) -> torch.Tensor:
    """Negative Gaussian likelihood objective for one (X-block, Y) pair.

    NLL of the concatenated latents under the batch MLE minus the mean
    per-sample log-dets of both flows (change of variables back to data
    space).
    """
    if zx.shape[0] != zy.shape[0]:
        raise ValidationError(
            f"latent batches disagree: {zx.shape[0]} vs {zy.shape[0]} rows"
        )
    joint = torch.cat([zx, zy], dim=1)
    return gaussian_nll(joint) - logdet_x.mean() - logdet_y.mean()


def flow_loss(
    z1: torch.Tensor,
    z2: torch.Tensor,
    zy: torch.Tensor,
    logdet_1: torch.Tensor,
    logdet_2: torch.Tensor,
    logdet_y: torch.Tensor,
) -> torch.Tensor:
    """Training objective: both pair losses summed; fY's log-det counts in each."""
    return marginal_loss(z1, zy, logdet_1, logdet_y) + marginal_loss(
        z2, zy, logdet_2, logdet_y
    )
