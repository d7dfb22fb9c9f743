"""
Shared fixtures for the kronsolve test suite
"""

import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from backend.grid import build_grid, classify_box
from backend.kernel1d import ProductKernel

REPRODUCTION_FLAG = "KRONSOLVE_RUN_REPRODUCTION"


def pytest_collection_modifyitems(config, items):
    """Skip reproduction tests unless they were asked for explicitly"""
    if os.environ.get(REPRODUCTION_FLAG) == "1":
        return
    skip = pytest.mark.skip(reason=f"set {REPRODUCTION_FLAG}=1 to run")
    for item in items:
        if item.get_closest_marker("reproduction") is not None:
            item.add_marker(skip)


@pytest.fixture
def rng():
    """Seeded random generator"""
    return np.random.default_rng(1234)


@pytest.fixture
def small_grid():
    """7 x 6 uniform grid on the unit square"""
    return build_grid((7, 0.0, 1.0), (6, 0.0, 1.0))


@pytest.fixture
def well_conditioned_kernel():
    """Kernel whose Gram matrices on small grids are far from singular"""
    return ProductKernel((0.25, 0.3), nugget=1e-4)


@pytest.fixture
def small_box(small_grid):
    """Box classification of the small grid"""
    return classify_box(small_grid)
