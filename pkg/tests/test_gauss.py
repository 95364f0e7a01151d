"""Gaussian primitives: covariance MLE, PSD repair, whitening, entropy, MI."""
import numpy as np
import pytest

from gpid.errors import NumericalError, ValidationError
from gpid.gauss import (
    LN2,
    estimate_covariance,
    gaussian_entropy,
    gaussian_mi,
    mi_from_model,
    psd_repair,
    total_mi_from_model,
    whiten_transform,
)
from gpid.types import CovarianceModel, SampleMatrix

from conftest import random_joint


def test_estimate_covariance_matches_numpy(rng):
    vals = rng.standard_normal((200, 5)) @ rng.standard_normal((5, 5))
    sm = SampleMatrix(d1=2, d2=2, dy=1, values=vals)
    cov = estimate_covariance(sm)
    np.testing.assert_allclose(cov.sigma, np.cov(vals.T, bias=True), atol=1e-12)
    np.testing.assert_allclose(cov.mean, vals.mean(axis=0), atol=1e-14)
    assert (cov.d1, cov.d2, cov.dy) == (2, 2, 1)
    assert not cov.pairwise_only


def test_estimate_covariance_needs_two_rows():
    sm = SampleMatrix(d1=1, d2=1, dy=1, values=np.ones((1, 3)))
    with pytest.raises(ValidationError):
        estimate_covariance(sm)


def test_psd_repair_passthrough_is_identity():
    a = np.eye(3)
    assert psd_repair(a) is a


def test_psd_repair_clips_negative_eigenvalues():
    a = np.array([[1.0, 0.0], [0.0, -0.5]])
    fixed = psd_repair(a, floor=1e-8)
    w = np.linalg.eigvalsh(fixed)
    assert w.min() >= 1e-8 - 1e-15
    # the positive directions are untouched
    assert fixed[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_psd_repair_default_floor_scales_with_trace():
    a = np.diag([1e6, -1.0])
    fixed = psd_repair(a)
    assert np.linalg.eigvalsh(fixed).min() >= 1e-10 * 1e6 / 2 - 1e-9


def test_whiten_transform_produces_identity(rng):
    a = rng.standard_normal((4, 4))
    sigma = a @ a.T + 0.1 * np.eye(4)
    w = whiten_transform(sigma)
    np.testing.assert_allclose(w @ sigma @ w.T, np.eye(4), atol=1e-10)


def test_whiten_transform_rejects_singular():
    with pytest.raises(NumericalError):
        whiten_transform(np.diag([1.0, 0.0]))


def test_gaussian_entropy_scalar_closed_form():
    # h(N(0, s2)) = 0.5 ln(2 pi e s2)
    for s2 in (0.25, 1.0, 4.0):
        expect = 0.5 * np.log(2.0 * np.pi * np.e * s2)
        assert gaussian_entropy(np.array([[s2]])) == pytest.approx(expect, abs=1e-12)


def test_gaussian_entropy_additive_for_independent_blocks(rng):
    a = rng.standard_normal((3, 3))
    s1 = a @ a.T + 0.2 * np.eye(3)
    b = rng.standard_normal((2, 2))
    s2 = b @ b.T + 0.2 * np.eye(2)
    joint = np.block([[s1, np.zeros((3, 2))], [np.zeros((2, 3)), s2]])
    assert gaussian_entropy(joint) == pytest.approx(
        gaussian_entropy(s1) + gaussian_entropy(s2), abs=1e-10)


@pytest.mark.parametrize("rho", [-0.95, -0.5, 0.0, 0.3, 0.9])
def test_gaussian_mi_bivariate_closed_form(rho):
    # I(A;B) = -0.5 ln(1 - rho^2) for a correlated standard normal pair
    sigma = np.array([[1.0, rho], [rho, 1.0]])
    expect = -0.5 * np.log1p(-rho * rho)
    assert gaussian_mi(sigma, 1) == pytest.approx(expect, abs=1e-12)


def test_gaussian_mi_nonnegative_and_scale_invariant(rng):
    # MI is invariant under invertible maps applied to either block; test
    # with random block-diagonal transforms on random joints.
    for _ in range(25):
        da = int(rng.integers(1, 4))
        db = int(rng.integers(1, 4))
        d = da + db
        a = rng.standard_normal((d, d))
        sigma = a @ a.T + 0.3 * np.eye(d)
        base = gaussian_mi(sigma, da)
        assert base >= 0.0
        ta = rng.standard_normal((da, da)) + 2.0 * np.eye(da)
        tb = rng.standard_normal((db, db)) + 2.0 * np.eye(db)
        t = np.block([[ta, np.zeros((da, db))], [np.zeros((db, da)), tb]])
        assert gaussian_mi(t @ sigma @ t.T, da) == pytest.approx(base, abs=1e-8)


def test_mi_from_model_matches_direct_split(rng):
    cov = random_joint(rng, 2, 3, 2)
    pj = cov.pairwise_joint(1)
    assert mi_from_model(cov, 1) == pytest.approx(gaussian_mi(pj, 2), abs=1e-12)
    pj2 = cov.pairwise_joint(2)
    assert mi_from_model(cov, 2) == pytest.approx(gaussian_mi(pj2, 3), abs=1e-12)


def test_total_mi_from_model(rng):
    cov = random_joint(rng, 2, 2, 1)
    # I(X1,X2;Y) from the full joint, split at the Y boundary
    expect = gaussian_mi(cov.sigma, 4)
    assert total_mi_from_model(cov) == pytest.approx(expect, abs=1e-12)


def test_total_mi_requires_full_joint():
    cov = CovarianceModel.from_blocks(
        np.array([[2.0]]), np.array([[2.0]]), np.array([[1.0]]),
        np.array([[1.0]]), np.array([[1.0]]))
    with pytest.raises(ValidationError):
        total_mi_from_model(cov)


def test_ln2_constant():
    assert LN2 == pytest.approx(np.log(2.0), abs=0)
