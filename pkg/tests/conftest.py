"""Shared fixtures: reference grids, states and their tomograms.

Everything heavy is session-scoped; the transforms are deterministic, so
sharing them across test modules only saves time.  The cat state needs a
wider window than the default grid (its lobes sit at q = +/- 2 sqrt(2) and
the Gaussian-margin precondition is binding), hence the 9-unit variants.
"""

import numpy as np
import pytest

from tomoprop.grids import CoordinateGrid, TomogramGrid
from tomoprop.states import (
    density_from_wavefunction,
    make_cat,
    make_coherent,
    make_vacuum,
)
from tomoprop import transforms as tr


@pytest.fixture(scope="session")
def grid():
    return CoordinateGrid()


@pytest.fixture(scope="session")
def grid9():
    return CoordinateGrid(q_max=9.0, n_q=512)


@pytest.fixture(scope="session")
def tgrid():
    return TomogramGrid()


@pytest.fixture(scope="session")
def tgrid9():
    return TomogramGrid(x_max=9.0, n_x=1024, n_theta=180)


@pytest.fixture(scope="session")
def vacuum_psi(grid):
    return make_vacuum(grid)


@pytest.fixture(scope="session")
def vacuum_rho(vacuum_psi):
    return density_from_wavefunction(vacuum_psi)


@pytest.fixture(scope="session")
def coherent_psi(grid):
    return make_coherent(1.0, grid)


@pytest.fixture(scope="session")
def coherent_rho(coherent_psi):
    return density_from_wavefunction(coherent_psi)


@pytest.fixture(scope="session")
def coherent_complex_rho(grid):
    return density_from_wavefunction(make_coherent(1.0 + 0.5j, grid))


@pytest.fixture(scope="session")
def cat_psi(grid9):
    return make_cat(2.0, grid=grid9)


@pytest.fixture(scope="session")
def cat_rho(cat_psi):
    return density_from_wavefunction(cat_psi)


@pytest.fixture(scope="session")
def vacuum_tomogram(vacuum_rho, tgrid):
    return tr.tomogram_from_density(vacuum_rho, tgrid)


@pytest.fixture(scope="session")
def coherent_tomogram(coherent_rho, tgrid):
    return tr.tomogram_from_density(coherent_rho, tgrid)


@pytest.fixture(scope="session")
def coherent_pure_tomogram(coherent_psi, tgrid):
    # Wavefunction route: nonnegative by construction, used by the
    # conservation checks that track sign floors.
    return tr.tomogram_from_wavefunction(coherent_psi, tgrid)


@pytest.fixture(scope="session")
def cat_tomogram(cat_rho, tgrid9):
    return tr.tomogram_from_density(cat_rho, tgrid9)


def vacuum_tomogram_reference(tg):
    """Closed-form vacuum tomogram on a TomogramGrid, every row identical."""
    row = np.exp(-tg.xs**2) / np.sqrt(np.pi)
    return np.tile(row, (tg.n_theta, 1))


def coherent_tomogram_reference(tg, alpha):
    """Closed-form coherent tomogram: unit-width Gaussian on a moving center."""
    alpha = complex(alpha)
    xbar = np.sqrt(2.0) * (
        alpha.real * np.cos(tg.thetas) + alpha.imag * np.sin(tg.thetas)
    )
    return np.exp(-((tg.xs[None, :] - xbar[:, None]) ** 2)) / np.sqrt(np.pi)
