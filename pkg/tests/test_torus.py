"""Grid, field and serialization contracts.

The dealiasing oracle is independent of the implementation: products
are recomputed exactly on a zero-padded grid of twice the size and
compared mode by mode on the retained band.
"""

import numpy as np
import pytest

from parafield import (Field, PathField, apply_multiplier, forward_spectrum,
                       inverse_spectrum, make_grid, make_times,
                       pointwise_product, read_pfld, write_pfld)
from conftest import random_field


def test_make_grid_validates_size():
    with pytest.raises(ValueError):
        make_grid(7)
    with pytest.raises(ValueError):
        make_grid(48)
    g = make_grid(8)
    assert g.N == 8 and g.spacing == pytest.approx(2 * np.pi / 8)


def test_wavenumber_layout(grid16):
    # mode arrays follow the fft layout: index k holds wavenumber k mod N
    assert grid16.kx[1, 0] == 1
    assert grid16.kx[grid16.N - 1, 0] == -1
    assert grid16.k2[2, 3] == 13
    assert grid16.nyquist[grid16.N // 2, 0]
    assert grid16.dealias[5, 5] and not grid16.dealias[6, 0]


def test_field_roundtrip_and_nyquist(grid16, rng):
    v = rng.standard_normal((16, 16))
    f = Field.from_values(grid16, v)
    # Nyquist is projected out, everything else kept
    spec = np.fft.fft2(v)
    spec[grid16.nyquist] = 0.0
    assert np.allclose(f.values, np.fft.ifft2(spec).real, atol=1e-12)
    assert np.all(f.spectrum[grid16.nyquist] == 0)


def test_spectrum_convention_single_mode(grid16):
    # cos(2x) has coefficient 1/2 at modes (+-2, 0): spectrum = N^2/2 there
    X, _ = grid16.coords()
    f = Field.from_values(grid16, np.cos(2 * X))
    s = forward_spectrum(f)
    N = grid16.N
    assert s[2, 0] == pytest.approx(N ** 2 / 2, rel=1e-12)
    assert s[N - 2, 0] == pytest.approx(N ** 2 / 2, rel=1e-12)
    off = np.abs(s).sum() - np.abs(s[2, 0]) - np.abs(s[N - 2, 0])
    assert off < 1e-8 * N ** 2


def test_inverse_spectrum_rejects_non_hermitian(grid16):
    spec = np.zeros((16, 16), dtype=complex)
    spec[1, 0] = 1.0  # conjugate partner missing
    with pytest.raises(ValueError):
        inverse_spectrum(grid16, spec)


def test_parseval(grid16, rng):
    f = random_field(grid16, rng)
    lhs = np.sum(f.values ** 2)
    rhs = np.sum(np.abs(f.spectrum) ** 2) / grid16.N ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12)
    assert f.l2() == pytest.approx(np.sqrt(lhs) * grid16.spacing, rel=1e-12)


def test_field_arithmetic(grid16, rng):
    a = random_field(grid16, rng)
    b = random_field(grid16, rng)
    assert np.allclose((a + b).values, a.values + b.values)
    assert np.allclose((a - b).values, a.values - b.values)
    assert np.allclose((2.5 * a).values, 2.5 * a.values)
    assert np.allclose((-a).values, -a.values)
    assert a.shift(1.0).mean() == pytest.approx(a.mean() + 1.0)
    with pytest.raises(TypeError):
        a * b  # field products go through pointwise_product


def test_grid_mismatch_raises(grid16, rng):
    a = random_field(grid16, rng)
    b = random_field(make_grid(32), rng)
    with pytest.raises(ValueError):
        a + b


def _exact_product_coefficients(a, b):
    """Alias-free product coefficients via a zero-padded double grid."""
    N = a.grid.N
    out = []
    for f in (a, b):
        spec_big = np.zeros((2 * N, 2 * N), dtype=complex)
        spec_big[a.grid.kx % (2 * N), a.grid.ky % (2 * N)] = f.spectrum * 4
        out.append(np.fft.ifft2(spec_big).real)
    return np.fft.fft2(out[0] * out[1]) / (2 * N) ** 2


def test_dealiased_product_matches_padded_oracle(grid32, rng):
    a = random_field(grid32, rng, dealiased=True)
    b = random_field(grid32, rng, dealiased=True)
    p = pointwise_product(a, b)
    exact = _exact_product_coefficients(a, b)
    N = grid32.N
    got = p.spectrum / N ** 2
    keep = grid32.dealias  # band guaranteed alias-free by the 2/3 rule
    want = exact[grid32.kx % (2 * N), grid32.ky % (2 * N)]
    err = np.max(np.abs((got - want)[keep]))
    assert err <= 1e-12 * max(1.0, np.max(np.abs(want)))


def test_pointwise_product_no_dealias_is_grid_product(grid16, rng):
    a = random_field(grid16, rng)
    b = random_field(grid16, rng)
    p = pointwise_product(a, b, dealias=False)
    assert np.allclose(p.values, a.values * b.values, atol=1e-14)


def test_apply_multiplier_callable_and_array(grid16, rng):
    f = random_field(grid16, rng)
    g1 = apply_multiplier(f, lambda kx, ky: np.exp(-0.3 * (kx ** 2 + ky ** 2)))
    g2 = apply_multiplier(f, np.exp(-0.3 * grid16.k2))
    assert np.allclose(g1.values, g2.values, atol=1e-13)


def test_make_times():
    t = make_times(1.0, 0.25)
    assert np.allclose(t, [0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        make_times(1.0, 0.3)


def test_pathfield_contracts(grid16, rng):
    times = make_times(0.5, 0.25)
    fs = [random_field(grid16, rng) for _ in times]
    p = PathField(times, fs)
    assert len(p) == 3 and p.dt == pytest.approx(0.25)
    q = p.map(lambda f: 2.0 * f)
    assert np.allclose(q[1].values, 2 * p[1].values)
    assert np.allclose((p + p)[2].values, 2 * p[2].values)
    assert p.sup_linf() == max(f.linf() for f in fs)
    with pytest.raises(ValueError):
        PathField(np.array([0.0, 0.1, 0.3]), fs)  # nonuniform step
    with pytest.raises(ValueError):
        PathField(times, fs[:2])


def test_pfld_roundtrip(tmp_path, grid16, rng):
    f = random_field(grid16, rng)
    path = tmp_path / "one.pfld"
    write_pfld(path, f)
    N, slices = read_pfld(path)
    assert N == 16 and len(slices) == 1
    assert np.array_equal(slices[0], f.values)

    p = PathField(make_times(0.2, 0.1), [random_field(grid16, rng)
                                         for _ in range(3)])
    path2 = tmp_path / "path.pfld"
    write_pfld(path2, p)
    N2, slices2 = read_pfld(path2)
    assert N2 == 16 and len(slices2) == 3
    for s, f in zip(slices2, p.fields):
        assert np.array_equal(s, f.values)


def test_pfld_rejects_bad_magic(tmp_path):
    bad = tmp_path / "bad.pfld"
    bad.write_bytes(b"NOPE" + b"\0" * 16)
    with pytest.raises(ValueError):
        read_pfld(bad)
