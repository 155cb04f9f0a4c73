"""Paracontrolled data, the singular product and paralinearization.

A path u is stored as u = (dz < X) + mean_j (dmu_j < Xbar_j) + sharp,
slice by slice.  The remainder ``sharp`` is always the exact residual,
so decompose-then-reconstruct is the identity and the regularity of
sharp is checked as a property, not imposed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bony import corrector, para, resonant
from .interactions import EmpiricalMeasure, InteractionSpec, eval_f, eval_partial
from .littlewood_paley import DyadicPartition, dyadic_blocks
from .noise import EnhancedNoise
from .torus import Field, PathField, pointwise_product

__all__ = ["Paracontrolled", "decompose", "reconstruct", "pc_product",
           "paralinearize_f"]


@dataclass
class Paracontrolled:
    """Paracontrolled decomposition of a path.

    ``reference`` is the rough reference X; ``dz`` the Gubinelli
    derivative; ``dmu`` the per-sample measure derivatives with their
    references ``dmu_refs`` (both empty in the null-derivative case);
    ``sharp`` the residual.
    """

    reference: PathField
    dz: PathField
    sharp: PathField
    dmu: list = field(default_factory=list)
    dmu_refs: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.dmu) != len(self.dmu_refs):
            raise ValueError("dmu and dmu_refs must be aligned")


def decompose(u: PathField, reference: PathField, dz: PathField,
              dmu: list | None = None, dmu_refs: list | None = None,
              part: DyadicPartition | None = None) -> Paracontrolled:
    """Store u with the given derivatives; sharp is the exact residual."""
    part = part or dyadic_blocks(u.grid)
    dmu = dmu or []
    dmu_refs = dmu_refs or []
    paras = dz.zip_with(reference, lambda a, b: para(a, b, part))
    sharp = u - paras
    if dmu:
        mean = _mean_para(dmu, dmu_refs, part)
        sharp = sharp - mean
    return Paracontrolled(reference=reference, dz=dz, sharp=sharp,
                          dmu=list(dmu), dmu_refs=list(dmu_refs))


def _mean_para(dmu, dmu_refs, part) -> PathField:
    terms = [d.zip_with(r, lambda a, b: para(a, b, part))
             for d, r in zip(dmu, dmu_refs)]
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out * (1.0 / len(terms))


def reconstruct(pc: Paracontrolled, part: DyadicPartition | None = None) -> PathField:
    """u = (dz < X) + mean_j (dmu_j < Xbar_j) + sharp."""
    part = part or dyadic_blocks(pc.reference.grid)
    out = pc.dz.zip_with(pc.reference, lambda a, b: para(a, b, part)) + pc.sharp
    if pc.dmu:
        out = out + _mean_para(pc.dmu, pc.dmu_refs, part)
    return out


def pc_product(pc: Paracontrolled, en: EnhancedNoise, cross: list | None = None,
               part: DyadicPartition | None = None) -> PathField:
    """The singular product (u xi) of a paracontrolled path with the noise.

    Slice-wise sum of u < xi, xi < u, sharp (.) xi, the correctors of
    dz and each dmu_j, dz * xi2 and the mean of dmu_j * cross_j.
    """
    cross = cross or []
    if len(cross) != len(pc.dmu):
        raise ValueError("need one cross term per dmu entry")
    part = part or dyadic_blocks(en.grid)
    u = reconstruct(pc, part)
    out = []
    for i in range(len(u)):
        xi = en.xi[i]
        acc = para(u[i], xi, part) + para(xi, u[i], part)
        acc = acc + resonant(pc.sharp[i], xi, part)
        acc = acc + corrector(pc.dz[i], en.X[i], xi, part)
        acc = acc + pointwise_product(pc.dz[i], en.xi2[i])
        if pc.dmu:
            n = len(pc.dmu)
            for j in range(n):
                acc = acc + (1.0 / n) * corrector(pc.dmu[j][i], pc.dmu_refs[j][i],
                                                  xi, part)
                acc = acc + (1.0 / n) * pointwise_product(pc.dmu[j][i], cross[j][i])
        out.append(acc)
    return PathField(u.times, out)


def paralinearize_f(spec: InteractionSpec, u_pc: Paracontrolled,
                    sample_pcs: list | None = None,
                    part: DyadicPartition | None = None) -> Paracontrolled:
    """Paracontrolled structure of f(u, mu) for mu the samples' measure.

    dz = (d1 f)(u, mu) * u' and dmu_j = (sum over measure slots of the
    slot-j partial average) * v_j'; sharp is the exact residual of
    eval_f(u, mu).
    """
    sample_pcs = sample_pcs or []
    part = part or dyadic_blocks(u_pc.reference.grid)
    u = reconstruct(u_pc, part)
    samples = [reconstruct(s, part) for s in sample_pcs]
    if not samples:
        raise ValueError("need at least one measure sample")
    times = u.times
    dz_slices, dmu_sl = [], [[] for _ in samples]
    f_slices = []
    for i in range(len(u)):
        mu_i = EmpiricalMeasure([s[i] for s in samples])
        p1 = eval_partial(spec, 1, u[i], mu_i)
        dz_slices.append(pointwise_product(p1, u_pc.dz[i], dealias=False))
        f_slices.append(eval_f(spec, u[i], mu_i))
        for j, s_pc in enumerate(sample_pcs):
            amp = _slot_partial_sum(spec, u[i], mu_i, j)
            dmu_sl[j].append(pointwise_product(amp, s_pc.dz[i], dealias=False))
    dz = PathField(times, dz_slices)
    dmu = [PathField(times, sl) for sl in dmu_sl]
    dmu_refs = [s.reference for s in sample_pcs]
    f_path = PathField(times, f_slices)
    return decompose(f_path, u_pc.reference, dz, dmu, dmu_refs, part)


def _slot_partial_sum(spec: InteractionSpec, u: Field, mu: EmpiricalMeasure,
                      j: int) -> Field:
    """Sum over measure slots s of the average of d_{s+1}F with atom j in slot s."""
    import itertools

    n = len(mu)
    vals = mu.values()
    if spec.m == 1:
        dF = spec.partials[1]
        return Field(u.grid, np.asarray(dF(u.values, vals[j])))
    acc = np.zeros_like(u.values)
    for s in range(spec.m):
        dF = spec.partials[s + 1]
        others = [list(range(n))] * (spec.m - 1)
        for rest in itertools.product(*others):
            tup = list(rest[:s]) + [j] + list(rest[s:])
            acc += dF(u.values, *[vals[i] for i in tup])
    total = n ** (spec.m - 1)
    return Field(u.grid, acc / total)
