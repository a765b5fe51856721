import math

import pytest

from twointerval.core import BoundaryParams, IntervalPair


@pytest.fixture
def std_params():
    return BoundaryParams(math.sqrt(0.5), -0.125, 0.125, -0.25)


@pytest.fixture
def d23():
    return IntervalPair(2, 3)
