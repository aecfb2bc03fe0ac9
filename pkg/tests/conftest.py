import numpy as np
import pytest

from henochrome.grids import SampledEnvelope, SpectralAmplitude, TransverseGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20230115)


@pytest.fixture(scope="session")
def grid256():
    # 256^2 samples over 16 waists of W = 1
    return TransverseGrid(256, 16.0)


@pytest.fixture(scope="session")
def grid64():
    return TransverseGrid(64, 16.0)


def random_envelope(rng, grid, station=0.0):
    vals = rng.normal(size=(grid.n, grid.n)) + 1j * rng.normal(size=(grid.n, grid.n))
    return SampledEnvelope(grid, vals, station)


def random_spectrum(rng, grid):
    vals = rng.normal(size=(grid.n, grid.n)) + 1j * rng.normal(size=(grid.n, grid.n))
    return SpectralAmplitude(grid, vals)
