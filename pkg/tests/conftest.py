import numpy as np
import pytest

import combkit


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Compile the jitted kernels once so individual tests measure steady state.
    combkit.warmup()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260808)
