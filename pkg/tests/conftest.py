import numpy as np
import pytest

import reference_data as ref
from freeknots.dataset import DataSet


@pytest.fixture
def peak():
    return ref.isolated_peak()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_data(rng):
    def make(n, scale=1.0):
        x = np.sort(rng.choice(np.arange(200), size=n, replace=False)).astype(float)
        return DataSet(x, scale * rng.uniform(size=n))
    return make
