import numpy as np
import pytest

from fracspec.geometry import make_polar_grid, make_radial_grid


@pytest.fixture(scope="session")
def small_grid():
    """Cheap grid for structural tests."""
    return make_radial_grid(1.0, 12, 8.0, 8, grading=2.0)


@pytest.fixture(scope="session")
def small_polar(small_grid):
    return make_polar_grid(small_grid, 32)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
