"""Heat semigroup, Duhamel resolvent and exponential time stepping.

Everything acts mode by mode, so the linear heat part is exact up to
the grid cutoff: no stiffness restriction on the time step.
"""

from __future__ import annotations

import numpy as np

from .torus import Field, PathField, TorusGrid

__all__ = ["semigroup", "duhamel", "etd_step", "etd_weights"]


def semigroup(f: Field, t: float) -> Field:
    """Heat semigroup P_t f, multiplier e^{-t|k|^2}."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    g = f.grid
    return Field.from_spectrum(g, f.spectrum * np.exp(-t * g.k2), check=False)


_weights_cache: dict = {}


def etd_weights(grid: TorusGrid, dt: float):
    """Per-mode weights (E, I0, I1) of the exact exponential integrator.

    For zdot = -|k|^2 z + (a + b*tau) on a step of length dt:
    z_next = E*z + I0*a + I1*b with E = e^{-q dt}, I0 = (1-E)/q and
    I1 = dt/q - (1-E)/q^2 (limits dt and dt^2/2 at q = 0).
    """
    key = (grid.N, float(dt))
    if key in _weights_cache:
        return _weights_cache[key]
    q = grid.k2
    E = np.exp(-dt * q)
    with np.errstate(divide="ignore", invalid="ignore"):
        I0 = np.where(q > 0, -np.expm1(-dt * q) / np.where(q > 0, q, 1.0), dt)
        I1 = np.where(q > 0, dt / np.where(q > 0, q, 1.0) - I0 / np.where(q > 0, q, 1.0),
                      0.5 * dt * dt)
    _weights_cache[key] = (E, I0, I1)
    return E, I0, I1


def duhamel(zeta: PathField) -> PathField:
    """Mild solution Z_t = int_0^t P_{t-s} zeta_s ds with Z_0 = 0.

    Per-mode exact integration with the input interpolated piecewise
    linearly in time (second order in dt).
    """
    g = zeta.grid
    if len(zeta) == 1:
        return PathField(zeta.times, [Field.zero(g)], meta=dict(zeta.meta))
    dt = zeta.dt
    E, I0, I1 = etd_weights(g, dt)
    z = np.zeros((g.N, g.N), dtype=np.complex128)
    out = [Field.zero(g)]
    specs = [f.spectrum for f in zeta.fields]
    for n in range(len(zeta) - 1):
        a = specs[n]
        b = (specs[n + 1] - a) / dt
        z = E * z + I0 * a + I1 * b
        out.append(Field.from_spectrum(g, z, check=False))
    return PathField(zeta.times, out, meta=dict(zeta.meta))


def etd_step(u: Field, nonlin: Field, dt: float) -> Field:
    """One exponential-Euler step of du/dt = Laplacian(u) + nonlin."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    g = u.grid
    E, I0, _ = etd_weights(g, dt)
    spec = E * u.spectrum + I0 * nonlin.spectrum
    return Field.from_spectrum(g, spec, check=False)
