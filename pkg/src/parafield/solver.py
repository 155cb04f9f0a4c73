"""Time integrators for the additive, frozen-measure, particle and
mean-field equations.

All schemes are exponential-Euler in mild form: the heat part is exact
per Fourier mode and the nonlinearity enters through the phi_1 weight.
An explosion guard monitors the sup norm and raises ExplosionError with
the first crossing time instead of letting the run NaN out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bony import para
from .heat import etd_step, semigroup
from .interactions import EmpiricalMeasure, InteractionSpec, eval_f, eval_g, \
    eval_partial
from .littlewood_paley import DyadicPartition, RegularityParams, dyadic_blocks
from .noise import EnhancedNoise, MeanFieldEnhancedNoise, cross_resonant
from .paracontrolled import Paracontrolled, decompose, paralinearize_f, \
    pc_product, reconstruct
from .torus import Field, PathField, pointwise_product

__all__ = [
    "SolveConfig",
    "ExplosionError",
    "PicardError",
    "solve_additive_mckean",
    "solve_additive_frozen",
    "solve_renormalized",
    "solve_paracontrolled",
    "solve_particle_system",
    "solve_mean_field",
    "default_dt",
]


class ExplosionError(RuntimeError):
    """Raised when the sup norm crosses the guard level R."""

    def __init__(self, time: float, linf: float, R: float):
        super().__init__(f"|u|_inf = {linf:.3g} >= R = {R:.3g} at t = {time:.6g}")
        self.time = time
        self.linf = linf


class PicardError(RuntimeError):
    """Raised when the Picard-on-law iteration fails to converge."""

    def __init__(self, residuals):
        super().__init__(
            "Picard iteration did not reach tolerance; residuals: "
            + ", ".join(f"{r:.3e}" for r in residuals))
        self.residuals = list(residuals)


@dataclass
class SolveConfig:
    reg: RegularityParams = field(default_factory=RegularityParams)
    scheme: str = "direct_renormalized"
    picard_tol: float = 1e-4
    picard_max_iters: int = 40
    max_linf: float | None = None  # None: 10 * (1 + |u0|_inf)
    renormalize: bool = True  # counterterm switch, used by dichotomy runs

    def guard(self, u0_linf: float) -> float:
        if self.max_linf is not None:
            return self.max_linf
        return 10.0 * (1.0 + u0_linf)


def default_dt(eps: float, N: int) -> float:
    """Default step resolving both the mollifier scale and the grid."""
    return min(eps / 4.0, 1.0 / N)


def _check_guard(u: Field, R: float, t: float):
    m = u.linf()
    if m >= R or not np.isfinite(m):
        raise ExplosionError(t, m, R)


def solve_additive_mckean(g_spec: InteractionSpec | None, noises: list,
                          u0s: list, cfg: SolveConfig) -> list:
    """Coupled additive system: du^i = Lap u^i + zeta^i + g(u^i, mu^n).

    mu^n is the running empirical measure of the n fields.  With n
    equal to the Monte Carlo sample count this doubles as the additive
    mean-field solver (the particle system restates the mean-field
    equation on the uniform n-point space).
    """
    if len(noises) != len(u0s) or not noises:
        raise ValueError("need aligned, nonempty noise/initial lists")
    times = noises[0].times
    dt = float(times[1] - times[0])
    R = cfg.guard(max(u.linf() for u in u0s))
    cur = list(u0s)
    paths = [[u] for u in u0s]
    for n in range(times.size - 1):
        mu = EmpiricalMeasure(cur)
        nxt = []
        for i, u in enumerate(cur):
            nonlin = noises[i][n]
            if g_spec is not None:
                nonlin = nonlin + eval_g(g_spec, u, mu)
            v = etd_step(u, nonlin, dt)
            _check_guard(v, R, float(times[n + 1]))
            nxt.append(v)
        cur = nxt
        for i, v in enumerate(cur):
            paths[i].append(v)
    return [PathField(times, p) for p in paths]


def solve_additive_frozen(g_spec: InteractionSpec | None, noise: PathField,
                          u0: Field, frozen: list, cfg: SolveConfig) -> PathField:
    """One additive solve against a frozen empirical measure path.

    ``frozen`` is a list of PathField atoms; the measure at step n is
    their slice n.  Shares the stepping kernel of the stacked solver,
    so a particle re-solved against the recorded measure of a stacked
    run reproduces it bitwise.
    """
    times = noise.times
    dt = float(times[1] - times[0])
    R = cfg.guard(u0.linf())
    u = u0
    out = [u]
    for n in range(times.size - 1):
        mu = EmpiricalMeasure([p[n] for p in frozen])
        nonlin = noise[n]
        if g_spec is not None:
            nonlin = nonlin + eval_g(g_spec, u, mu)
        u = etd_step(u, nonlin, dt)
        _check_guard(u, R, float(times[n + 1]))
        out.append(u)
    return PathField(times, out)


def _renorm_rhs(f_spec, g_spec, u, mu, xi_slice, c_val, renormalize):
    fval = eval_f(f_spec, u, mu)
    rhs = pointwise_product(fval, xi_slice)
    if renormalize and c_val != 0.0:
        dfval = eval_partial(f_spec, 1, u, mu)
        rhs = rhs - c_val * pointwise_product(fval, dfval, dealias=False)
    if g_spec is not None:
        rhs = rhs + eval_g(g_spec, u, mu)
    return rhs


def solve_renormalized(en: EnhancedNoise, frozen: list, f_spec: InteractionSpec,
                       g_spec: InteractionSpec | None, u0: Field,
                       cfg: SolveConfig) -> PathField:
    """Frozen-measure renormalized equation, direct scheme.

    du = Lap u + f(u, v_t) xi_eps - c_eps(t) (f d1f)(u, v_t) + g(u, v_t)
    with v_t the slice-t empirical measure of the frozen atoms.
    """
    times = en.times
    dt = float(times[1] - times[0])
    cs = np.atleast_1d(en.c_eps(times))
    R = cfg.guard(u0.linf())
    u = u0
    out = [u]
    for n in range(times.size - 1):
        mu = EmpiricalMeasure([p[n] for p in frozen])
        rhs = _renorm_rhs(f_spec, g_spec, u, mu, en.xi[n], float(cs[n]),
                          cfg.renormalize)
        u = etd_step(u, rhs, dt)
        _check_guard(u, R, float(times[n + 1]))
        out.append(u)
    return PathField(times, out)


def solve_paracontrolled(en: EnhancedNoise, frozen_pcs: list,
                         f_spec: InteractionSpec,
                         g_spec: InteractionSpec | None, u0: Field,
                         cfg: SolveConfig,
                         part: DyadicPartition | None = None) -> Paracontrolled:
    """Frozen-measure equation via the remainder formulation.

    Steps sharp with (d_t - Lap) sharp = Phi_sharp where Phi_sharp is
    the paracontrolled product of f(u, v) with the enhanced noise plus
    g minus f(u, v) < xi; the Gubinelli derivative is pinned to
    f(u, v) at every slice and u is rebuilt as (dz < X) + sharp.
    """
    if not frozen_pcs:
        raise ValueError("need frozen paracontrolled samples")
    for s in frozen_pcs:
        if s.dz is None or s.sharp is None:
            raise ValueError("frozen samples must carry paracontrolled data")
    part = part or dyadic_blocks(en.grid)
    times = en.times
    dt = float(times[1] - times[0])
    R = cfg.guard(u0.linf())
    sample_paths = [reconstruct(s, part) for s in frozen_pcs]
    # cross terms xi (.) Xbar_j for the dmu channel of the f structure
    cross = [cross_resonant(en.xi, s.reference, part)
             if s.reference.meta.get("stream_id") != en.stream_id
             else en.xi2  # same stream: renormalized diagonal
             for s in frozen_pcs]

    def fix_dz(sharp_f: Field, X_f: Field, mu: EmpiricalMeasure, u_guess: Field):
        # solve u = (f(u, mu) < X) + sharp to high accuracy
        u = u_guess
        for _ in range(100):
            dz = eval_f(f_spec, u, mu)
            u_new = para(dz, X_f, part) + sharp_f
            if (u_new - u).linf() <= 1e-14 * max(1.0, u.linf()):
                u = u_new
                break
            u = u_new
        dz = eval_f(f_spec, u, mu)
        return u, dz

    mu0 = EmpiricalMeasure([p[0] for p in sample_paths])
    sharp = u0  # X_0 = 0, so u_0 = sharp_0
    u, dz = fix_dz(sharp, en.X[0], mu0, u0)
    us, dzs, sharps = [u], [dz], [sharp]
    for n in range(times.size - 1):
        mu = EmpiricalMeasure([p[n] for p in sample_paths])
        u_pc = Paracontrolled(reference=en.X, dz=_const_path(times, dz, n),
                              sharp=_const_path(times, sharp, n))
        f_pc = _paralin_slice(f_spec, u_pc, frozen_pcs, sample_paths, n,
                              en, part)
        phi = pc_product_slice(f_pc, en, cross, n, part)
        phi = phi - para(dz, en.xi[n], part)
        if g_spec is not None:
            phi = phi + eval_g(g_spec, u, mu)
        sharp = etd_step(sharp, phi, dt)
        mu_next = EmpiricalMeasure([p[n + 1] for p in sample_paths])
        u, dz = fix_dz(sharp, en.X[n + 1], mu_next, u)
        sharp = u - para(dz, en.X[n + 1], part)  # exact residual storage
        _check_guard(u, R, float(times[n + 1]))
        us.append(u)
        dzs.append(dz)
        sharps.append(sharp)
    return Paracontrolled(reference=en.X, dz=PathField(times, dzs),
                          sharp=PathField(times, sharps))


def _const_path(times, f: Field, n: int) -> PathField:
    # single-slice stand-in aligned with slice n; only slice n is read
    return PathField(np.asarray([times[n]]), [f])


def _paralin_slice(f_spec, u_pc_slice, frozen_pcs, sample_paths, n, en, part):
    """Slice-n paralinearization of f, returned as one-slice structures."""
    t = np.asarray([en.times[n]])
    sample_pcs_n = [
        Paracontrolled(reference=PathField(t, [s.reference[n]],
                                           meta=s.reference.meta),
                       dz=PathField(t, [s.dz[n]]),
                       sharp=PathField(t, [s.sharp[n]]))
        for s in frozen_pcs
    ]
    u_pc_n = Paracontrolled(
        reference=PathField(t, [en.X[n]], meta=en.X.meta),
        dz=u_pc_slice.dz, sharp=u_pc_slice.sharp)
    return paralinearize_f(f_spec, u_pc_n, sample_pcs_n, part)


def pc_product_slice(f_pc: Paracontrolled, en: EnhancedNoise, cross: list,
                     n: int, part: DyadicPartition) -> Field:
    """Slice n of the paracontrolled product of a one-slice structure."""
    t = np.asarray([en.times[n]])
    en_n = EnhancedNoise(
        xi=PathField(t, [en.xi[n]], meta=en.xi.meta),
        X=PathField(t, [en.X[n]], meta=en.X.meta),
        xi2=PathField(t, [en.xi2[n]], meta=en.xi2.meta),
        c_eps=en.c_eps, eps=en.eps)
    cross_n = [PathField(t, [c[n]]) for c in cross]
    return pc_product(f_pc, en_n, cross_n, part)[0]


def solve_particle_system(mf: MeanFieldEnhancedNoise, f_spec: InteractionSpec,
                          g_spec: InteractionSpec | None, u0s: list,
                          cfg: SolveConfig) -> list:
    """Renormalized n-particle system with the running empirical measure."""
    n_part = len(mf)
    if len(u0s) != n_part:
        raise ValueError("need one initial condition per particle")
    times = mf[0].times
    dt = float(times[1] - times[0])
    cs = np.atleast_1d(mf[0].c_eps(times))
    R = cfg.guard(max(u.linf() for u in u0s))
    cur = list(u0s)
    paths = [[u] for u in u0s]
    for n in range(times.size - 1):
        mu = EmpiricalMeasure(cur)
        nxt = []
        for i, u in enumerate(cur):
            rhs = _renorm_rhs(f_spec, g_spec, u, mu, mf[i].xi[n],
                              float(cs[n]), cfg.renormalize)
            v = etd_step(u, rhs, dt)
            _check_guard(v, R, float(times[n + 1]))
            nxt.append(v)
        cur = nxt
        for i, v in enumerate(cur):
            paths[i].append(v)
    return [PathField(times, p) for p in paths]


def solve_mean_field(enhanced: list, f_spec: InteractionSpec,
                     g_spec: InteractionSpec | None, u0: Field,
                     cfg: SolveConfig):
    """Picard-on-law solver for the singular mean-field equation.

    ``enhanced`` is a list of M frozen enhanced noises (common random
    numbers across iterations).  Iterates u^{k+1,i} = solve against the
    empirical measure of {u^{k,j}} until the ensemble is a fixed point.
    Returns (ensemble, iterations, residuals).
    """
    M = len(enhanced)
    if M < 2:
        raise ValueError("need M >= 2 samples")
    times = enhanced[0].times
    flow = [semigroup(u0, float(t)) for t in times]
    ensemble = [PathField(times, flow) for _ in range(M)]
    residuals = []
    for it in range(cfg.picard_max_iters):
        frozen = list(ensemble)
        new = [solve_renormalized(enhanced[i], frozen, f_spec, g_spec, u0, cfg)
               for i in range(M)]
        res = max((new[i] - ensemble[i]).sup_linf() for i in range(M))
        residuals.append(res)
        ensemble = new
        if res < cfg.picard_tol:
            return ensemble, it + 1, residuals
    raise PicardError(residuals)
