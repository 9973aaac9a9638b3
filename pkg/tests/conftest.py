import numpy as np
import pytest

from spcons import LeaderFollowerSystem, build_graph


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return build_graph([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


@pytest.fixture
def two_input_system():
    """Inputs 0 and 1 joined by one unit follower edge."""
    return LeaderFollowerSystem(build_graph([(0, 1, 1.0)]), [0, 1])
