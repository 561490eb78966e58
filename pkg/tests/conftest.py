import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from chiralchain.quadstate import BoundaryWarning

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(autouse=True)
def _quiet_boundary_warnings():
    # short-chain correlator tests hit the chain ends on purpose
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryWarning)
        yield


@pytest.fixture
def rng():
    return np.random.default_rng(42)
