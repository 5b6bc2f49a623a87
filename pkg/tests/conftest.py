import numpy as np
import pytest

from convexlab.nets import DirectionNet


@pytest.fixture(scope="session")
def net2():
    return DirectionNet.standard(2, 2048)


@pytest.fixture(scope="session")
def net2_fine():
    return DirectionNet.standard(2, 4096)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240613)
