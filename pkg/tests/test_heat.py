"""Heat semigroup and exponential integrator against closed forms."""

import numpy as np
import pytest

from parafield import Field, PathField, duhamel, etd_step, make_times, semigroup
from parafield.heat import etd_weights
from conftest import random_field


def test_semigroup_single_mode(grid32):
    X, Y = grid32.coords()
    f = Field.from_values(grid32, np.cos(2 * X + Y))  # |k|^2 = 5
    for t in (0.0, 0.01, 0.3):
        g = semigroup(f, t)
        assert np.allclose(g.values, np.exp(-5.0 * t) * f.values, atol=1e-13)
    with pytest.raises(ValueError):
        semigroup(f, -0.1)


def test_semigroup_composition(grid32, rng):
    f = random_field(grid32, rng)
    a = semigroup(semigroup(f, 0.07), 0.05)
    b = semigroup(f, 0.12)
    assert (a - b).linf() < 1e-12 * max(1.0, f.linf())


def test_etd_weights_zero_mode_limits(grid16):
    dt = 0.37
    E, I0, I1 = etd_weights(grid16, dt)
    assert E[0, 0] == pytest.approx(1.0)
    assert I0[0, 0] == pytest.approx(dt)
    assert I1[0, 0] == pytest.approx(0.5 * dt * dt)
    # generic mode: closed forms
    q = grid16.k2[3, 1]
    assert E[3, 1] == pytest.approx(np.exp(-dt * q), rel=1e-12)
    assert I0[3, 1] == pytest.approx((1 - np.exp(-dt * q)) / q, rel=1e-10)
    assert I1[3, 1] == pytest.approx(dt / q - (1 - np.exp(-dt * q)) / q ** 2,
                                     rel=1e-8)


def test_etd_step_formula(grid16, rng):
    u = random_field(grid16, rng)
    n = random_field(grid16, rng)
    dt = 0.05
    E, I0, _ = etd_weights(grid16, dt)
    want = np.fft.ifft2(E * u.spectrum + I0 * n.spectrum).real
    got = etd_step(u, n, dt)
    assert np.max(np.abs(got.values - want)) < 1e-12
    with pytest.raises(ValueError):
        etd_step(u, n, 0.0)


def test_duhamel_closed_form_linear_forcing(grid32):
    # forcing (1 + 2s) cos(x + y), |k|^2 = 2: the integrator is exact
    # for inputs linear in time, so the closed form holds to rounding
    X, Y = grid32.coords()
    base = np.cos(X + Y)
    times = make_times(0.5, 0.03125)
    zeta = PathField(times, [Field.from_values(grid32, (1 + 2 * s) * base)
                             for s in times])
    Z = duhamel(zeta)
    q = 2.0
    for i, t in enumerate(times):
        E = np.exp(-q * t)
        amp = (1 - E) / q + 2.0 * (t / q - (1 - E) / q ** 2)
        assert np.max(np.abs(Z[i].values - amp * base)) < 1e-12


def test_duhamel_zero_mode_integrates(grid16):
    # constant-in-space forcing accumulates linearly (no decay at k = 0)
    times = make_times(1.0, 0.25)
    one = Field(grid16, np.ones((16, 16)))
    Z = duhamel(PathField.constant(times, one))
    for i, t in enumerate(times):
        assert Z[i].mean() == pytest.approx(t, abs=1e-12)


def test_duhamel_single_slice(grid16):
    Z = duhamel(PathField(np.array([0.0]), [Field.zero(grid16)]))
    assert len(Z) == 1 and Z[0].linf() == 0.0
