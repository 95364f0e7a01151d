"""Channel reduction: whitened broadcast form and noise cross-covariance."""
import numpy as np
import pytest

from gpid.channel import (
    BroadcastChannel,
    NoiseCrossCov,
    reduce_to_channel,
    true_noise_cross_cov,
)
from gpid.errors import ContractError, ModelError, ValidationError
from gpid.solver import objective
from gpid.types import CovarianceModel

from conftest import random_joint


def uniq_red_cov(s2: float) -> CovarianceModel:
    # X1 = Y + n1 (unit noise), X2 = X1 + n2 (variance s2), Y standard normal
    sigma = np.array([
        [2.0, 2.0, 1.0],
        [2.0, 2.0 + s2, 1.0],
        [1.0, 1.0, 1.0],
    ])
    return CovarianceModel(d1=1, d2=1, dy=1, mean=np.zeros(3), sigma=sigma)


def test_reduce_scalar_chain_channel():
    s2 = 1.0
    ch = reduce_to_channel(uniq_red_cov(s2))
    # regression gains are 1 for both arms; whitening scales by noise sd
    assert ch.h1[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert ch.h2[0, 0] == pytest.approx(1.0 / np.sqrt(1.0 + s2), abs=1e-12)
    assert ch.w1[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert ch.w2[0, 0] == pytest.approx(1.0 / np.sqrt(1.0 + s2), abs=1e-12)
    assert ch.i1 == pytest.approx(0.5 * np.log(2.0), abs=1e-12)
    assert ch.i2 == pytest.approx(0.5 * np.log(3.0 / 2.0), abs=1e-12)
    # X2 adds nothing beyond X1 here, so ip_total = i1
    assert ch.ip_total == pytest.approx(ch.i1, abs=1e-12)


def test_reduce_random_joint_has_consistent_mis(rng):
    cov = random_joint(rng, 3, 2, 2)
    ch = reduce_to_channel(cov)
    assert ch.ip_total is not None
    assert ch.ip_total >= max(ch.i1, ch.i2) - 1e-10
    # whitened noise means H Sigma_y H^T + I is each arm's whitened marginal:
    # MI must reproduce the model values
    sy = cov.sigma_y
    g1 = ch.h1 @ sy @ ch.h1.T + np.eye(ch.d1)
    i1 = 0.5 * (np.linalg.slogdet(g1)[1])
    assert i1 == pytest.approx(ch.i1, abs=1e-9)


def test_reduce_pairwise_only_lacks_total(rng):
    full = random_joint(rng, 2, 2, 2)
    pw = CovarianceModel(d1=2, d2=2, dy=2, mean=np.zeros(6), sigma=full.sigma,
                         pairwise_only=True)
    ch = reduce_to_channel(pw)
    assert ch.ip_total is None
    full_ch = reduce_to_channel(full)
    assert ch.i1 == pytest.approx(full_ch.i1, abs=1e-12)
    assert ch.i2 == pytest.approx(full_ch.i2, abs=1e-12)


def test_singular_y_is_rejected_by_name():
    # rank-1 Y block; rejected at model construction, naming the block
    bad = np.eye(4)
    bad[2:, 2:] = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ValidationError, match="sigma_y"):
        CovarianceModel(d1=1, d2=1, dy=2, mean=np.zeros(4), sigma=bad)


def test_true_noise_cross_cov_recovers_joint_mi():
    # The off block from the actual joint must evaluate to the full objective:
    # objective(ch, off) = 2 I(X1,X2; Y)
    for s2 in (0.5, 1.0, 2.0):
        cov = uniq_red_cov(s2)
        ch = reduce_to_channel(cov)
        off = true_noise_cross_cov(cov, ch)
        assert objective(ch, off.off) == pytest.approx(2.0 * ch.ip_total, abs=1e-9)


def test_true_noise_cross_cov_random(rng):
    for _ in range(10):
        cov = random_joint(rng, int(rng.integers(1, 4)), int(rng.integers(1, 4)),
                           int(rng.integers(1, 3)))
        ch = reduce_to_channel(cov)
        off = true_noise_cross_cov(cov, ch)
        assert np.linalg.norm(off.off, 2) <= 1.0 + 1e-9
        assert objective(ch, off.off) == pytest.approx(2.0 * ch.ip_total, abs=1e-8)


def test_true_noise_cross_cov_needs_full_joint():
    cov = CovarianceModel.from_blocks(
        np.array([[2.0]]), np.array([[2.0]]), np.array([[1.0]]),
        np.array([[1.0]]), np.array([[1.0]]))
    ch = reduce_to_channel(cov)
    with pytest.raises(ContractError):
        true_noise_cross_cov(cov, ch)


def test_noise_cross_cov_spectral_cap():
    with pytest.raises(ModelError, match="spectral norm"):
        NoiseCrossCov(off=np.array([[1.2]]))
    ok = NoiseCrossCov(off=np.array([[0.9]]))
    assert ok.off[0, 0] == 0.9


def test_broadcast_channel_validation():
    eye = np.eye(1)
    with pytest.raises(ModelError):
        BroadcastChannel(h1=np.ones((1, 2)), h2=eye, sigma_y=eye,
                         w1=eye, w2=eye, i1=0.1, i2=0.1)
    with pytest.raises(ModelError):
        BroadcastChannel(h1=eye, h2=eye, sigma_y=eye,
                         w1=eye, w2=eye, i1=-0.5, i2=0.1)


def test_channel_dims(rng):
    cov = random_joint(rng, 4, 2, 3)
    ch = reduce_to_channel(cov)
    assert (ch.d1, ch.d2, ch.dy) == (4, 2, 3)
    assert ch.h1.shape == (4, 3)
    assert ch.h2.shape == (2, 3)
