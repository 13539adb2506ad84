import numpy as np
import pytest

from cdgarch.kernels import DelayModel, ExponentialKernel
from cdgarch.noise import NoiseSpec


@pytest.fixture
def unit_noise():
    return NoiseSpec(0.0, 1.0, 0.0, 1.0, 11)


@pytest.fixture
def ref_model():
    k = ExponentialKernel(1.0, 2.0, 1.0)
    return DelayModel(1.0, 3.0, 0.5, k, k, NoiseSpec(0.0, 1.0, 0.0, 1.0, 20240917))


@pytest.fixture
def cogarch():
    return DelayModel(1.0, 1.0, 0.25, None, None, NoiseSpec(0.0, 1.0, 0.0, 1.0, 7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
