import numpy as np
import pytest

from gconvex.manifold import conformal_test, euclidean, sphere_chart


@pytest.fixture
def conformal():
    return conformal_test(2)


@pytest.fixture
def flat():
    return euclidean(2)


@pytest.fixture
def sphere():
    return sphere_chart(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def great_circle(a, b, ts):
    """Slerp between unit vectors; the oracle for sphere-chart geodesics."""
    om = np.arccos(np.clip(np.sum(a * b, axis=-1), -1.0, 1.0))[..., None, None]
    ts = np.asarray(ts)[None, :, None]
    return (np.sin((1 - ts) * om) * a[..., None, :] + np.sin(ts * om) * b[..., None, :]) / np.sin(om)
