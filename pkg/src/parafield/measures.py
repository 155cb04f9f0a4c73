"""Empirical-measure distances and chaos metrics.

The p-Wasserstein distance between equal-size uniform ensembles is the
exact optimal-assignment value on the pairwise cost matrix.  Ground
metrics on fields: grid L^2 (default), L^inf, or the Besov-alpha
estimator norm of the difference (a grid proxy for a Hoelder ground
metric).
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .littlewood_paley import besov_norm, dyadic_blocks
from .torus import Field

__all__ = ["ground_distance_matrix", "wasserstein", "chaos_metric",
           "subsample_ensemble"]

MAX_EXACT_ATOMS = 512


def _as_values(atoms):
    return np.stack([a.values for a in atoms])


def ground_distance_matrix(xs: list, ys: list, ground="L2") -> np.ndarray:
    """Pairwise ground distances d(x_i, y_j)."""
    g = xs[0].grid
    if ground == "L2":
        X = _as_values(xs).reshape(len(xs), -1)
        Y = _as_values(ys).reshape(len(ys), -1)
        x2 = (X ** 2).sum(1)[:, None]
        y2 = (Y ** 2).sum(1)[None, :]
        d2 = np.maximum(x2 + y2 - 2.0 * X @ Y.T, 0.0)
        return np.sqrt(d2) * g.spacing
    if ground == "Linf":
        out = np.empty((len(xs), len(ys)))
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out[i, j] = np.max(np.abs(x.values - y.values))
        return out
    if isinstance(ground, tuple) and ground[0] == "besov":
        alpha = float(ground[1])
        part = dyadic_blocks(g)
        out = np.empty((len(xs), len(ys)))
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                out[i, j] = besov_norm(x - y, alpha, np.inf, np.inf, part)
        return out
    raise ValueError(f"unknown ground metric {ground!r}")


def wasserstein(mu_atoms: list, nu_atoms: list, p: float = 2,
                ground="L2") -> float:
    """Exact W_p between equal-size uniform ensembles of fields.

    min over pairings sigma of (1/n sum_i d(x_i, y_sigma(i))^p)^{1/p},
    via the Hungarian assignment on the cost matrix.
    """
    if len(mu_atoms) != len(nu_atoms):
        raise ValueError(
            "exact mode needs equal atom counts; subsample the larger "
            "ensemble (see subsample_ensemble)")
    n = len(mu_atoms)
    if n > MAX_EXACT_ATOMS:
        raise ValueError(f"exact mode capped at {MAX_EXACT_ATOMS} atoms")
    cost = ground_distance_matrix(mu_atoms, nu_atoms, ground) ** p
    rows, cols = linear_sum_assignment(cost)
    return float((cost[rows, cols].mean()) ** (1.0 / p))


def subsample_ensemble(atoms: list, size: int, seed: int = 0) -> list:
    """Seeded uniform subsample without replacement."""
    if size > len(atoms):
        raise ValueError("cannot subsample beyond the ensemble size")
    rng = np.random.Generator(np.random.Philox(key=np.array(
        [seed, len(atoms)], dtype=np.uint64)))
    idx = rng.choice(len(atoms), size=size, replace=False)
    return [atoms[i] for i in sorted(idx)]


def chaos_metric(particle_runs: dict, reference: list, p: float = 2,
                 ground="L2", seed: int = 0) -> list:
    """Distance-to-mean-field table across system sizes.

    ``particle_runs`` maps n to a list of K runs, each run a list of n
    terminal-time fields.  For each n the primary statistic is W_p
    between the first-particle law across runs and the reference
    ensemble (subsampled to K atoms); the secondary statistic averages
    W_p(mu^n_T, reference subsampled to n) over runs.
    """
    if not reference:
        raise ValueError("empty reference ensemble")
    table = []
    for n in sorted(particle_runs):
        runs = particle_runs[n]
        if not runs:
            raise ValueError("empty ensemble for n = %d" % n)
        K = len(runs)
        first = [run[0] for run in runs]
        ref_K = subsample_ensemble(reference, min(K, len(reference)), seed)
        d_first = wasserstein(first[:len(ref_K)], ref_K, p, ground)
        per_run = []
        for r, run in enumerate(runs):
            ref_n = subsample_ensemble(reference, min(n, len(reference)),
                                       seed + 1 + r)
            per_run.append(wasserstein(run[:len(ref_n)], ref_n, p, ground))
        table.append({"n": n, "K": K, "p": p,
                      "distance": d_first,
                      "measure_distance": float(np.mean(per_run)),
                      "stderr": float(np.std(per_run) / np.sqrt(len(per_run)))})
    return table
