"""Dyadic partition, Besov estimator and parabolic norm contracts."""

import numpy as np
import pytest

from parafield import (DyadicPartition, Field, PathField, RegularityParams,
                       besov_norm, dyadic_blocks, lp_project, make_grid,
                       make_times, parabolic_holder_norm)
from conftest import random_field


def single_mode(grid, kx, ky, amp=1.0):
    X, Y = grid.coords()
    return Field.from_values(grid, amp * np.cos(kx * X + ky * Y))


@pytest.mark.parametrize("mode,block", [
    ((0, 0), -1), ((1, 0), 0), ((1, 1), 0), ((3, 0), 1),
    ((4, 0), 2), ((5, 5), 2), ((8, 0), 3), ((15, 0), 3),
])
def test_block_membership(grid64, mode, block):
    part = dyadic_blocks(grid64)
    if mode == (0, 0):
        f = Field(grid64, np.ones((64, 64)))
    else:
        f = single_mode(grid64, *mode)
    proj = lp_project(f, block, part)
    assert np.allclose(proj.values, f.values, atol=1e-12)
    for ell in part.ells:
        if ell != block:
            assert lp_project(f, ell, part).linf() < 1e-12


def test_sharp_weights_partition_unity(grid64):
    part = dyadic_blocks(grid64)
    total = part.weights.sum(axis=0)
    keep = ~grid64.nyquist
    assert np.allclose(total[keep], 1.0, atol=1e-14)
    assert np.allclose(total[~keep], 0.0, atol=1e-14)


def test_smooth_weights_partition_unity(grid64):
    part = DyadicPartition(grid64, variant="smooth")
    total = part.weights.sum(axis=0)
    keep = ~grid64.nyquist
    assert np.allclose(total[keep], 1.0, atol=1e-12)


def test_reconstruction_from_blocks(grid64, rng):
    part = dyadic_blocks(grid64)
    f = random_field(grid64, rng)
    recon = part.block_fields(f).sum(axis=0)
    assert np.max(np.abs(recon - f.values)) <= 1e-10 * max(1.0, f.linf())


def test_block_index_bounds(grid16):
    part = dyadic_blocks(grid16)
    with pytest.raises(ValueError):
        part.index(part.L_max + 1)
    with pytest.raises(ValueError):
        part.index(-2)
    with pytest.raises(ValueError):
        DyadicPartition(grid16, variant="boxcar")


def test_besov_single_mode_values(grid64):
    # cos(3x) sits in block 1: sup norm term is 2^gamma * 1,
    # L2 term is 2^gamma * ||cos||_{L2} = 2^gamma * pi * sqrt(2)
    f = single_mode(grid64, 3, 0)
    for gamma in (-1.0, 0.0, 0.7):
        assert besov_norm(f, gamma) == pytest.approx(2.0 ** gamma, rel=1e-10)
        assert besov_norm(f, gamma, q_space=2) == pytest.approx(
            2.0 ** gamma * np.pi * np.sqrt(2.0), rel=1e-10)


def test_besov_homogeneity_and_sum(grid32, rng):
    part = dyadic_blocks(grid32)
    f = random_field(grid32, rng)
    for q_sum in (1, 2, np.inf):
        n1 = besov_norm(f, 0.3, 2, q_sum, part)
        n2 = besov_norm(3.0 * f, 0.3, 2, q_sum, part)
        assert n2 == pytest.approx(3.0 * n1, rel=1e-12)
    # l^1 over blocks dominates l^inf
    assert besov_norm(f, 0.3, 2, 1, part) >= besov_norm(f, 0.3, 2, np.inf, part)


def test_regularity_params_validation():
    RegularityParams(alpha=0.75, beta=0.7)
    with pytest.raises(ValueError):
        RegularityParams(alpha=0.7, beta=0.75)
    with pytest.raises(ValueError):
        RegularityParams(alpha=0.75, beta=0.5)


def test_parabolic_holder_norm(grid16, rng):
    times = make_times(0.5, 0.25)
    f = random_field(grid16, rng, smooth=0.1)
    const = PathField.constant(times, f)
    part = dyadic_blocks(grid16)
    alpha = 0.75
    n_const = parabolic_holder_norm(const, alpha, part)
    # no time variation: the norm is the max of spatial and sup parts
    spatial = besov_norm(f, alpha, np.inf, np.inf, part)
    assert n_const == pytest.approx(max(spatial, f.linf()), rel=1e-12)
    # adding time variation can only increase the estimator
    wiggly = PathField(times, [f, 2.0 * f, f])
    assert parabolic_holder_norm(wiggly, alpha, part) >= n_const
    with pytest.raises(ValueError):
        parabolic_holder_norm(PathField(np.array([0.0]), [f]), alpha)


def test_partition_cache_shared():
    g = make_grid(16)
    assert dyadic_blocks(g) is dyadic_blocks(make_grid(16))
