import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def orthonormal_rows(rng, k, n):
    """k x n matrix with orthonormal rows."""
    q, _ = np.linalg.qr(rng.standard_normal((n, k)))
    return q.T
