import numpy as np
import pytest
from hypothesis import settings

from mkdvlab.spectral import Grid, SpectralField

settings.register_profile("lab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("lab")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid():
    return Grid(128.0, 1024)


def random_bandlimited(grid, band, rng, real=True):
    """Random field with Gaussian coefficients on ``|xi| < band``."""
    c = (rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)) * (np.abs(grid.freqs) < band)
    f = SpectralField(grid, c)
    return f.symmetrized() if real else f


def gaussian(grid, amp=1.0, x0=0.0, width=1.0):
    from mkdvlab.spectral import to_spectral
    return to_spectral(amp * np.exp(-((grid.x - x0) / width) ** 2), grid)
