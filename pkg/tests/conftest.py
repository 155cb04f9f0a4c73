"""Shared helpers for the test suite."""

import numpy as np
import pytest

from parafield import Field, make_grid


def random_field(grid, rng, dealiased=False, smooth=0.0):
    """Random real field; optionally truncated to the 2/3 band or smoothed."""
    spec = np.fft.fft2(rng.standard_normal((grid.N, grid.N)))
    if dealiased:
        spec = spec * grid.dealias
    if smooth > 0:
        spec = spec * np.exp(-smooth * grid.k2)
    return Field.from_spectrum(grid, spec, check=False)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def grid16():
    return make_grid(16)


@pytest.fixture
def grid32():
    return make_grid(32)


@pytest.fixture
def grid64():
    return make_grid(64)
