import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from occulp.discretize import GridSpec, build, from_tables  # noqa: E402
from occulp.system import make_system  # noqa: E402


@pytest.fixture
def drift_bump():
    """The worked example: y+ = y + u on [0,10], g(y) = 1 - 1/(1+(y-2)^2)."""
    model = make_system("drift", cost=("bump", {"center": 2.0}))
    return build(model, GridSpec([0.0], [10.0], [10]))


@pytest.fixture
def two_cycle():
    """a -> b -> a under the single control; g(a)=0, g(b)=1."""
    return from_tables([[1], [0]], [[0.0], [1.0]])


@pytest.fixture
def fixed_point():
    model = make_system("fixed-point", {"n_controls": 3}, cost=("control", {"weights": [2.0, 0.5, 1.0]}))
    return build(model, GridSpec([0.0], [4.0], [4]))
