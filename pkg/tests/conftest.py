import numpy as np
import pytest
from hypothesis import settings

from sparsitron_ggm import PrecisionModel, derive_params

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def two_node():
    return PrecisionModel.from_theta([[2.0, -1.0], [-1.0, 2.0]])


@pytest.fixture(scope="session")
def two_node_params(two_node):
    return derive_params(two_node)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
