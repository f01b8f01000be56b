import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from spectra_inv import core


@pytest.fixture(scope="session")
def grid():
    """The default desk-scale grid shared by the expensive tests."""
    return core.make_grid(2000)


@pytest.fixture(scope="session")
def small_grid():
    return core.make_grid(200)


@pytest.fixture(scope="session")
def zero(grid):
    return core.preset_potential("zero", [], grid)


@pytest.fixture(scope="session")
def cosine22(grid):
    return core.preset_potential("cosine", [2.0, 2.0], grid)


@pytest.fixture(scope="session")
def rf3(grid):
    return core.preset_potential("random_fourier", [2.0, 6], grid, seed=3)
