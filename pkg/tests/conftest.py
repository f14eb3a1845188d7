import numpy as np
import pytest

from kgm.model import Field, ModelParams, Power, make_grid


@pytest.fixture(scope="session")
def grid_small():
    return make_grid(400, 20.0)


@pytest.fixture(scope="session")
def grid_medium():
    return make_grid(2000, 30.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def params_p3():
    return ModelParams(m=1.0, omega=0.5, e=1.0, nonlinearity=Power(3.0))


def random_bump(grid, rng, n_bumps=3, r_center_frac=0.25):
    """Smooth compactly-concentrated random field with zero outer value."""
    v = np.zeros(grid.n)
    for _ in range(n_bumps):
        a = rng.uniform(0.3, 2.5)
        c = rng.uniform(0.0, grid.r_max * r_center_frac)
        s = rng.uniform(0.5, 2.5)
        v += a * np.exp(-((grid.nodes - c) ** 2) / (2 * s * s))
    v[-1] = 0.0
    return Field(grid, v)
