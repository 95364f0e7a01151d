"""Marginal-Gaussian training loss: batch-MLE NLL and log-det credits."""
import math

import numpy as np
import pytest
import torch

from flowpid.errors import ValidationError
from flowpid.loss import flow_loss, gaussian_nll, marginal_loss


def _nll_oracle(z: np.ndarray) -> float:
    # plug-in Gaussian NLL per row: 0.5 (d ln 2pi + ln det S + d); with the
    # MLE covariance the mean Mahalanobis term is exactly d
    n, d = z.shape
    c = z - z.mean(axis=0)
    s = (c.T @ c) / n
    return 0.5 * (d * math.log(2.0 * math.pi) + np.linalg.slogdet(s)[1] + d)


def test_gaussian_nll_matches_plugin_formula(rng):
    for d in (1, 2, 5):
        z = rng.standard_normal((64, d)) @ (rng.standard_normal((d, d)) + np.eye(d))
        got = float(gaussian_nll(torch.from_numpy(z)))
        assert got == pytest.approx(_nll_oracle(z), abs=1e-10)


def test_gaussian_nll_scaling_shifts_by_log_volume(rng):
    # NLL(c z) = NLL(z) + d ln c: only the covariance determinant moves
    z = torch.from_numpy(rng.standard_normal((80, 3)))
    base = float(gaussian_nll(z))
    for c in (0.5, 2.0, 10.0):
        assert float(gaussian_nll(c * z)) == pytest.approx(
            base + 3 * math.log(c), abs=1e-9
        )


def test_gaussian_nll_translation_invariant(rng):
    z = torch.from_numpy(rng.standard_normal((50, 4)))
    shifted = z + torch.tensor([100.0, -3.0, 0.25, 7.0], dtype=torch.float64)
    assert float(gaussian_nll(shifted)) == pytest.approx(
        float(gaussian_nll(z)), abs=1e-8
    )


def test_gaussian_nll_repairs_singular_batch(rng):
    # duplicated column -> rank-deficient covariance; the loss floors the
    # diagonal, warns, and still produces a finite value
    col = torch.from_numpy(rng.standard_normal((32, 1)))
    z = torch.cat([col, col], dim=1)
    with pytest.warns(RuntimeWarning, match="singular batch covariance"):
        v = gaussian_nll(z)
    assert bool(torch.isfinite(v))


def test_gaussian_nll_rejects_tiny_batches():
    with pytest.raises(ValidationError):
        gaussian_nll(torch.zeros(1, 3, dtype=torch.float64))
    with pytest.raises(ValidationError):
        gaussian_nll(torch.zeros(4, dtype=torch.float64))


def test_gaussian_nll_differentiable(rng):
    z = torch.from_numpy(rng.standard_normal((40, 2))).requires_grad_(True)
    gaussian_nll(z).backward()
    assert z.grad is not None
    assert bool(torch.isfinite(z.grad).all())


def test_marginal_loss_subtracts_logdet_means(rng):
    zx = torch.from_numpy(rng.standard_normal((60, 2)))
    zy = torch.from_numpy(rng.standard_normal((60, 3)))
    ldx = torch.from_numpy(rng.standard_normal(60))
    ldy = torch.from_numpy(rng.standard_normal(60))
    joint = float(gaussian_nll(torch.cat([zx, zy], dim=1)))
    got = float(marginal_loss(zx, zy, ldx, ldy))
    assert got == pytest.approx(
        joint - float(ldx.mean()) - float(ldy.mean()), abs=1e-10
    )


def test_marginal_loss_rejects_mismatched_batches(rng):
    zx = torch.from_numpy(rng.standard_normal((10, 2)))
    zy = torch.from_numpy(rng.standard_normal((11, 2)))
    ld = torch.zeros(10, dtype=torch.float64)
    with pytest.raises(ValidationError):
        marginal_loss(zx, zy, ld, ld)


def test_flow_loss_sums_both_pairs(rng):
    z1 = torch.from_numpy(rng.standard_normal((48, 2)))
    z2 = torch.from_numpy(rng.standard_normal((48, 3)))
    zy = torch.from_numpy(rng.standard_normal((48, 2)))
    ld1 = torch.from_numpy(rng.standard_normal(48))
    ld2 = torch.from_numpy(rng.standard_normal(48))
    ldy = torch.from_numpy(rng.standard_normal(48))
    got = float(flow_loss(z1, z2, zy, ld1, ld2, ldy))
    want = float(marginal_loss(z1, zy, ld1, ldy)) + float(
        marginal_loss(z2, zy, ld2, ldy)
    )
    assert got == pytest.approx(want, abs=1e-10)
    # the target block's log-det is credited once per pair
    bumped = float(flow_loss(z1, z2, zy, ld1, ld2, ldy + 1.0))
    assert bumped == pytest.approx(got - 2.0, abs=1e-10)
