import numpy as np
import pytest

from ampqed.grids import SpatialGrid
from ampqed.media import Layer, MediumModel, Oscillator


def slab(strength, plasma=2.0, resonance=10.0, damping=1.0, z=(0.5, 1.5), ell=0.0):
    return MediumModel((Layer(z[0], z[1], (Oscillator(strength, resonance, damping, plasma),),
                              ell),))


@pytest.fixture
def grid():
    return SpatialGrid.uniform(0.0, 2.0, 128)


@pytest.fixture
def small_grid():
    return SpatialGrid.uniform(0.0, 2.0, 32)


@pytest.fixture
def absorbing():
    return slab(1.0)


@pytest.fixture
def gain():
    return slab(-1.0)


def random_grid(rng, n):
    w = rng.uniform(0.5, 1.5, n)
    z = np.cumsum(w) - 0.5 * w
    return SpatialGrid(z, w)


def random_hermitian(rng, grid, eigenvalues):
    """Kernel with prescribed spectrum and random eigenfunctions."""
    n = grid.n
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    u, _ = np.linalg.qr(a)
    s = 1.0 / np.sqrt(grid.weights)
    return s[:, None] * ((u * eigenvalues[None, :]) @ u.conj().T) * s[None, :]
