"""Gaussian noise class, mollification, renormalization and enhancement.

Noise normalization: writing a field as sum_k ghat(k) e^{i k.x}, the
sampler enforces E[ghat_t(k) ghat_s(-k')] = 1_{k=k'} c(t,s) Chat(k)
with Chat the spatial spectral density (Chat = 1 is spatial white
noise) and c the temporal correlation.  The zero mode is always zero
(null spatial mean) and Nyquist modes are dropped.

Sampling is keyed by (seed, stream_id) through a counter-based Philox
generator: identical configurations give identical bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bony import resonant
from .heat import duhamel
from .littlewood_paley import DyadicPartition, dyadic_blocks
from .torus import Field, PathField, TorusGrid

__all__ = [
    "NoiseSpec",
    "EnhancedNoise",
    "MeanFieldEnhancedNoise",
    "power_law_multiplier",
    "sample_noise",
    "mollify",
    "renorm_constant",
    "enhance",
    "cross_resonant",
    "mean_field_enhance",
    "resolved_eps",
]

TIME_INDEPENDENT = "white"
EXP_CORRELATED = "exp_correlated"


def power_law_multiplier(eta: float):
    """Spatial spectral density Chat(k) = |k|^eta (zero at k = 0)."""

    def chat(absk: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            out = np.where(absk > 0, absk ** eta, 0.0)
        return out

    return chat


def low_damped_multiplier(k0: float, floor: float):
    """White density with the shells below |k| = k0 damped to ``floor``.

    Keeps the log-divergent tail intact while shrinking the convergent
    low-mode bulk of the renormalization constant, which sharpens the
    relative divergence between mollification levels.
    """

    def chat(absk: np.ndarray) -> np.ndarray:
        return np.where(absk < k0, floor, 1.0)

    return chat


@dataclass(frozen=True)
class NoiseSpec:
    """Covariance class of the Gaussian noise.

    ``spatial_multiplier`` maps |k| to Chat(k) >= 0 (None means white,
    Chat = 1).  ``temporal`` is "white" for time-independent noise
    (c(t,s) = 1) or "exp_correlated" for the stationary OU correlation
    c(t,s) = exp(-lam |t-s|).
    """

    seed: int
    temporal: str = TIME_INDEPENDENT
    lam: float = 1.0
    spatial_multiplier: object = None

    def __post_init__(self):
        if self.temporal not in (TIME_INDEPENDENT, EXP_CORRELATED):
            raise ValueError(f"unknown temporal class {self.temporal!r}")

    def chat(self, grid: TorusGrid) -> np.ndarray:
        absk = np.sqrt(grid.k2)
        if self.spatial_multiplier is None:
            chat = np.ones_like(absk)
        else:
            chat = np.asarray(self.spatial_multiplier(absk), dtype=np.float64)
        chat = chat.copy()
        chat[grid.k2 == 0] = 0.0
        chat[grid.nyquist] = 0.0
        if np.any(chat < 0):
            raise ValueError("spatial multiplier must be nonnegative")
        return chat


def _rng(seed: int, stream_id: int) -> np.random.Generator:
    key = np.array([seed % 2 ** 64, stream_id % 2 ** 64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_noise(spec: NoiseSpec, grid: TorusGrid, times: np.ndarray,
                 stream_id: int = 0) -> PathField:
    """Draw one noise path on the given grid and time grid.

    Time-independent noise reuses a single spatial draw at all times;
    the exp-correlated class evolves every mode by a stationary AR(1)
    update that matches exp(-lam |t-s|) exactly on the time grid.
    """
    times = np.asarray(times, dtype=np.float64)
    rng = _rng(spec.seed, stream_id)
    amp = grid.N * np.sqrt(spec.chat(grid))

    def to_field(w: np.ndarray) -> Field:
        return Field.from_spectrum(grid, amp * np.fft.fft2(w), check=False)

    fields: list[Field]
    if spec.temporal == TIME_INDEPENDENT:
        f = to_field(rng.standard_normal((grid.N, grid.N)))
        fields = [f] * times.size
    else:
        dt = float(times[1] - times[0]) if times.size > 1 else 0.0
        a = np.exp(-spec.lam * dt)
        w = rng.standard_normal((grid.N, grid.N))
        fields = [to_field(w)]
        for _ in range(times.size - 1):
            w = a * w + np.sqrt(1.0 - a * a) * rng.standard_normal((grid.N, grid.N))
            fields.append(to_field(w))
    return PathField(times, fields,
                     meta={"spec": spec, "stream_id": stream_id, "eps": 0.0})


def mollify(xi: PathField, eps: float) -> PathField:
    """Heat-kernel mollifier at scale eps: multiplier e^{-eps |k|^2}."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        return xi
    g = xi.grid
    m = np.exp(-eps * g.k2)
    out = xi.map(lambda f: Field.from_spectrum(g, f.spectrum * m, check=False))
    out.meta.update(xi.meta)
    out.meta["eps"] = xi.meta.get("eps", 0.0) + eps
    return out


def resolved_eps(grid: TorusGrid, eps: float) -> bool:
    """True when the mollifier kills the cutoff: e^{-2 eps (N/2)^2} <= 1e-3."""
    return np.exp(-2.0 * eps * (grid.N / 2) ** 2) <= 1e-3


def _retained(grid: TorusGrid) -> np.ndarray:
    # modes entering dealiased quadratic products, zero mode excluded
    return grid.dealias & ~grid.nyquist & (grid.k2 > 0)


def renorm_constant(spec: NoiseSpec, eps: float, times: np.ndarray,
                    grid: TorusGrid, part: DyadicPartition | None = None,
                    n_mc: int = 128):
    """Renormalization constant c_eps(t) = E[(X_eps (.) xi_eps)(t, x)].

    Analytic for the time-independent class:
    c_eps(t) = sum_{k != 0} w_res(k) Chat(k) e^{-2 eps |k|^2}
               (1 - e^{-t |k|^2}) / |k|^2
    over the dealias-retained modes (matching the dealiased resonant
    product).  Other temporal classes fall back to a Monte Carlo
    estimate on the time grid.  Returns a callable of t.
    """
    part = part or dyadic_blocks(grid)
    times = np.asarray(times, dtype=np.float64)
    if spec.temporal == TIME_INDEPENDENT:
        keep = _retained(grid)
        chat = spec.chat(grid)[keep]
        wres = part.resonant_weight[keep]
        q = grid.k2[keep]
        moll = np.exp(-2.0 * eps * q)

        def c_eps(t):
            t = np.asarray(t, dtype=np.float64)
            integ = -np.expm1(-np.multiply.outer(t, q)) / q
            return np.einsum("...k,k->...", integ, wres * chat * moll)

        return c_eps

    if spec.temporal == EXP_CORRELATED and times.size > 1:
        # exact expectation of the discrete scheme: the AR(1) mode update
        # paired with the piecewise-linear exponential integrator gives
        # m_{n+1} = e^{-q dt} a m_n + (I0 - I1/dt) a + I1/dt per mode,
        # with a = e^{-lam dt}, m_n = E[z_n wbar_n], z_0 = 0
        keep = _retained(grid)
        chat = spec.chat(grid)[keep]
        wres = part.resonant_weight[keep]
        q = grid.k2[keep]
        moll = np.exp(-2.0 * eps * q)
        dt = float(times[1] - times[0])
        a = np.exp(-spec.lam * dt)
        E = np.exp(-q * dt)
        I0 = (1.0 - E) / q
        I1 = dt / q - I0 / q
        weight = wres * chat * moll
        m = np.zeros_like(q)
        vals = np.zeros(times.size)
        for n in range(times.size - 1):
            m = E * a * m + (I0 - I1 / dt) * a + I1 / dt
            vals[n + 1] = float(np.dot(weight, m))

        def c_eps_ou(t):
            return np.interp(t, times, vals)

        return c_eps_ou

    # Monte Carlo fallback: average grid-mean of X (.) xi over draws
    acc = np.zeros(times.size)
    mc_spec = replace(spec, seed=spec.seed + 0x9E3779B97F4A7C15)
    for s in range(n_mc):
        xi = mollify(sample_noise(mc_spec, grid, times, stream_id=s), eps)
        X = duhamel(xi)
        acc += np.array([resonant(X[i], xi[i], part).mean()
                         for i in range(times.size)])
    acc /= n_mc

    def c_eps_mc(t):
        return np.interp(t, times, acc)

    return c_eps_mc


@dataclass
class EnhancedNoise:
    """The pair (xi, X (.) xi - c_eps) plus the reference X."""

    xi: PathField
    X: PathField
    xi2: PathField
    c_eps: object  # callable of t
    eps: float

    @property
    def times(self):
        return self.xi.times

    @property
    def grid(self):
        return self.xi.grid

    @property
    def stream_id(self):
        return self.xi.meta.get("stream_id")


def enhance(xi_raw: PathField, eps: float,
            part: DyadicPartition | None = None, n_mc: int = 128) -> EnhancedNoise:
    """Mollify, solve for X and renormalize the resonant part."""
    spec = xi_raw.meta.get("spec")
    if spec is None:
        raise ValueError("xi_raw must come from sample_noise")
    grid = xi_raw.grid
    part = part or dyadic_blocks(grid)
    xi = mollify(xi_raw, eps)
    X = duhamel(xi)
    c_eps = renorm_constant(spec, eps, xi.times, grid, part, n_mc=n_mc)
    cs = np.atleast_1d(c_eps(xi.times))
    xi2 = PathField(xi.times, [
        resonant(X[i], xi[i], part).shift(-float(cs[i]))
        for i in range(len(xi))
    ], meta=dict(xi.meta))
    return EnhancedNoise(xi=xi, X=X, xi2=xi2, c_eps=c_eps, eps=eps)


def cross_resonant(xi_i: PathField, X_j: PathField,
                   part: DyadicPartition | None = None) -> PathField:
    """Cross term xi^i (.) X^j between independent streams, no counterterm."""
    si = xi_i.meta.get("stream_id")
    sj = X_j.meta.get("stream_id")
    if si is not None and sj is not None and si == sj:
        raise ValueError("cross_resonant needs independent streams "
                         "(equal stream ids would require renormalization)")
    part = part or dyadic_blocks(xi_i.grid)
    return xi_i.zip_with(X_j, lambda a, b: resonant(b, a, part))


class MeanFieldEnhancedNoise:
    """n independent enhanced noises plus lazily computed cross terms.

    Diagonal entries are the renormalized xi2; off-diagonal pairs
    (i, j) give xi^i (.) X^j without counterterm.
    """

    def __init__(self, noises: list[EnhancedNoise],
                 part: DyadicPartition | None = None):
        if not noises:
            raise ValueError("need n >= 1 streams")
        self.noises = noises
        self.part = part or dyadic_blocks(noises[0].grid)
        self._cross: dict = {}

    def __len__(self):
        return len(self.noises)

    def __getitem__(self, i) -> EnhancedNoise:
        return self.noises[i]

    def cross(self, i: int, j: int) -> PathField:
        """xi^i (.) X^j for i != j; cached after first computation."""
        if i == j:
            raise ValueError("diagonal entries live in xi2, not cross")
        key = (i, j)
        if key not in self._cross:
            xi_i = self.noises[i].xi
            X_j = self.noises[j].X
            out = xi_i.zip_with(X_j, lambda a, b: resonant(b, a, self.part))
            self._cross[key] = out
        return self._cross[key]


def mean_field_enhance(n: int, spec: NoiseSpec, eps: float, grid: TorusGrid,
                       times: np.ndarray, master_seed: int | None = None,
                       part: DyadicPartition | None = None) -> MeanFieldEnhancedNoise:
    """Sample n independent streams and enhance each one."""
    if n < 1:
        raise ValueError("n >= 1 required")
    part = part or dyadic_blocks(grid)
    seed = spec.seed if master_seed is None else master_seed
    base = replace(spec, seed=seed)
    c_shared = None
    noises = []
    for i in range(n):
        xi_raw = sample_noise(base, grid, times, stream_id=i)
        if c_shared is None or base.temporal != TIME_INDEPENDENT:
            en = enhance(xi_raw, eps, part)
            c_shared = en.c_eps
        else:
            xi = mollify(xi_raw, eps)
            X = duhamel(xi)
            cs = np.atleast_1d(c_shared(xi.times))
            xi2 = PathField(xi.times, [
                resonant(X[k], xi[k], part).shift(-float(cs[k]))
                for k in range(len(xi))
            ], meta=dict(xi.meta))
            en = EnhancedNoise(xi=xi, X=X, xi2=xi2, c_eps=c_shared, eps=eps)
        noises.append(en)
    return MeanFieldEnhancedNoise(noises, part)
