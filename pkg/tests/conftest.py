"""Shared helpers for the test suite."""
import numpy as np
import pytest

from gpid.types import CovarianceModel


def random_joint(rng: np.random.Generator, d1: int, d2: int, dy: int,
                 ridge: float = 0.25) -> CovarianceModel:
    """Random full joint covariance over (X1, X2, Y), safely positive definite."""
    d = d1 + d2 + dy
    a = rng.standard_normal((d, d)) / np.sqrt(d)
    sigma = a @ a.T + ridge * np.eye(d)
    return CovarianceModel(d1=d1, d2=d2, dy=dy, mean=np.zeros(d), sigma=sigma)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
