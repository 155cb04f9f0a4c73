"""Real scalar fields on the discretized 2-torus.

The domain is [0, 2pi)^2 sampled on an N x N grid.  Spectra follow the
unnormalized-forward convention: ``spectrum = fft2(values)`` and
``values = ifft2(spectrum)`` (numpy's default), so the Fourier
*coefficient* of the plane wave e^{i k.x} is ``spectrum[k] / N**2``.
Nyquist rows/columns (wavenumber -N/2) are forced to zero everywhere so
that every retained mode has its conjugate partner on the grid.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TorusGrid",
    "Field",
    "PathField",
    "make_grid",
    "make_times",
    "forward_spectrum",
    "inverse_spectrum",
    "apply_multiplier",
    "pointwise_product",
    "write_pfld",
    "read_pfld",
]

PFLD_MAGIC = b"PFLD"


@dataclass(frozen=True)
class TorusGrid:
    """Uniform N x N grid on the 2-torus with integer Fourier modes."""

    N: int
    spacing: float
    kx: np.ndarray  # integer wavenumbers along axis 0, shape (N, N)
    ky: np.ndarray  # integer wavenumbers along axis 1, shape (N, N)
    k2: np.ndarray  # |k|^2, shape (N, N)
    nyquist: np.ndarray  # True where the mode must be zeroed
    dealias: np.ndarray  # True on modes kept by the 2/3 rule

    def __eq__(self, other):
        return isinstance(other, TorusGrid) and self.N == other.N

    def __hash__(self):
        return hash(("TorusGrid", self.N))

    @property
    def x(self):
        return np.arange(self.N) * self.spacing

    def coords(self):
        """Meshgrid of physical coordinates, shape (N, N) each."""
        x = self.x
        return np.meshgrid(x, x, indexing="ij")


def make_grid(N: int) -> TorusGrid:
    """Build the torus grid.  N must be a power of two, N >= 8."""
    if N < 8 or N & (N - 1) != 0:
        raise ValueError(f"grid size must be a power of two >= 8, got {N}")
    k = np.fft.fftfreq(N, d=1.0 / N).astype(np.int64)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    k2 = (kx * kx + ky * ky).astype(np.float64)
    nyquist = (kx == -N // 2) | (ky == -N // 2)
    cut = N // 3
    dealias = (np.abs(kx) <= cut) & (np.abs(ky) <= cut)
    for a in (kx, ky, k2, nyquist, dealias):
        a.flags.writeable = False
    return TorusGrid(N=N, spacing=2.0 * np.pi / N, kx=kx, ky=ky, k2=k2,
                     nyquist=nyquist, dealias=dealias)


def _check_hermitian(grid: TorusGrid, spec: np.ndarray, tol: float = 1e-8):
    flipped = np.conj(spec[(-grid.kx) % grid.N, (-grid.ky) % grid.N])
    err = np.max(np.abs(spec - flipped))
    scale = max(1.0, float(np.max(np.abs(spec))))
    if err > tol * scale:
        raise ValueError(f"spectrum is not Hermitian (defect {err:.3e})")


class Field:
    """Immutable real scalar field on a :class:`TorusGrid`.

    The spectrum is cached lazily and kept consistent with the values.
    """

    __slots__ = ("grid", "values", "_spectrum")

    def __init__(self, grid: TorusGrid, values: np.ndarray,
                 spectrum: np.ndarray | None = None):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.N, grid.N):
            raise ValueError("values shape does not match grid")
        values = values.copy()
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self._spectrum = spectrum

    @classmethod
    def from_values(cls, grid: TorusGrid, values: np.ndarray) -> "Field":
        """Field from grid samples; Nyquist content is projected out."""
        spec = np.fft.fft2(np.asarray(values, dtype=np.float64))
        spec[grid.nyquist] = 0.0
        return cls.from_spectrum(grid, spec, check=False)

    @classmethod
    def from_spectrum(cls, grid: TorusGrid, spec: np.ndarray,
                      check: bool = True) -> "Field":
        spec = np.asarray(spec, dtype=np.complex128).copy()
        if spec.shape != (grid.N, grid.N):
            raise ValueError("spectrum shape does not match grid")
        spec[grid.nyquist] = 0.0
        if check:
            _check_hermitian(grid, spec)
        vals = np.fft.ifft2(spec).real
        spec.flags.writeable = False
        return cls(grid, vals, spectrum=spec)

    @classmethod
    def zero(cls, grid: TorusGrid) -> "Field":
        return cls(grid, np.zeros((grid.N, grid.N)))

    @property
    def spectrum(self) -> np.ndarray:
        if self._spectrum is None:
            spec = np.fft.fft2(self.values)
            spec[self.grid.nyquist] = 0.0
            spec.flags.writeable = False
            self._spectrum = spec
        return self._spectrum

    # arithmetic: fields form a vector space
    def __add__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, Field):
            raise TypeError("use pointwise_product for field products")
        return Field(self.grid, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def shift(self, c: float) -> "Field":
        """Add the constant c to the field."""
        return Field(self.grid, self.values + float(c))

    def linf(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2(self) -> float:
        return float(np.sqrt(np.sum(self.values ** 2)) * self.grid.spacing)

    def mean(self) -> float:
        return float(np.mean(self.values))


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError("grid mismatch")


class PathField:
    """A time-indexed path of fields on a common grid and uniform times."""

    __slots__ = ("times", "fields", "meta")

    def __init__(self, times: np.ndarray, fields: list, meta: dict | None = None):
        times = np.asarray(times, dtype=np.float64)
        if len(fields) != times.size:
            raise ValueError("times/fields length mismatch")
        if times.size >= 2:
            dt = np.diff(times)
            if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-10, atol=1e-14):
                raise ValueError("times must be strictly increasing with constant step")
        g = fields[0].grid
        for f in fields:
            if f.grid != g:
                raise ValueError("all slices must share one grid")
        self.times = times
        self.fields = list(fields)
        self.meta = dict(meta or {})

    @property
    def grid(self) -> TorusGrid:
        return self.fields[0].grid

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def __len__(self):
        return len(self.fields)

    def __getitem__(self, i) -> Field:
        return self.fields[i]

    def map(self, fn) -> "PathField":
        """Apply a Field -> Field function to every slice."""
        return PathField(self.times, [fn(f) for f in self.fields], meta=self.meta)

    def zip_with(self, other: "PathField", fn) -> "PathField":
        if not np.array_equal(self.times, other.times):
            raise ValueError("mismatched time grids")
        out = [fn(a, b) for a, b in zip(self.fields, other.fields)]
        return PathField(self.times, out)

    def __add__(self, other):
        return self.zip_with(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self.zip_with(other, lambda a, b: a - b)

    def __mul__(self, c):
        return self.map(lambda f: f * c)

    __rmul__ = __mul__

    def sup_linf(self) -> float:
        return max(f.linf() for f in self.fields)

    @classmethod
    def constant(cls, times, f: Field) -> "PathField":
        return cls(times, [f] * len(np.atleast_1d(times)))

    @classmethod
    def zero(cls, times, grid: TorusGrid) -> "PathField":
        return cls.constant(times, Field.zero(grid))


def make_times(T: float, dt: float) -> np.ndarray:
    """Uniform time grid 0 = t_0 < ... < t_M = T with step dt."""
    M = int(round(T / dt))
    if M < 1 or abs(M * dt - T) > 1e-9 * max(1.0, T):
        raise ValueError("T must be an integer multiple of dt")
    return np.linspace(0.0, T, M + 1)


def forward_spectrum(f: Field) -> np.ndarray:
    """Discrete Fourier transform of the field (unnormalized sum)."""
    return np.array(f.spectrum)


def inverse_spectrum(grid: TorusGrid, spec: np.ndarray) -> Field:
    """Field from a Hermitian spectrum; rejects non-Hermitian input."""
    return Field.from_spectrum(grid, spec, check=True)


def apply_multiplier(f: Field, m) -> Field:
    """Apply the Fourier multiplier ``m`` to the field.

    ``m`` is either an (N, N) array aligned with the grid's mode layout
    or a callable of the integer mode arrays (kx, ky).
    """
    g = f.grid
    w = m(g.kx, g.ky) if callable(m) else np.asarray(m)
    return Field.from_spectrum(g, f.spectrum * w, check=False)


def pointwise_product(a: Field, b: Field, dealias: bool = True) -> Field:
    """Grid product a*b; the 2/3 rule truncates both inputs first."""
    _same_grid(a, b)
    if dealias:
        g = a.grid
        av = np.fft.ifft2(a.spectrum * g.dealias).real
        bv = np.fft.ifft2(b.spectrum * g.dealias).real
        return Field(g, av * bv)
    return Field(a.grid, a.values * b.values)


def write_pfld(path, data) -> None:
    """Write a Field or PathField snapshot in the PFLD binary format.

    Layout: magic "PFLD", u32 N, u32 M, then M slices of N*N float64
    little-endian values, row-major.
    """
    if isinstance(data, Field):
        slices = [data]
    else:
        slices = list(data.fields)
    N = slices[0].grid.N
    with open(path, "wb") as fh:
        fh.write(PFLD_MAGIC)
        fh.write(struct.pack("<II", N, len(slices)))
        for f in slices:
            fh.write(f.values.astype("<f8").tobytes(order="C"))


def read_pfld(path):
    """Read a PFLD snapshot; returns (N, list of (N, N) float arrays)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != PFLD_MAGIC:
            raise ValueError("not a PFLD file")
        N, M = struct.unpack("<II", fh.read(8))
        out = []
        for _ in range(M):
            buf = fh.read(8 * N * N)
            out.append(np.frombuffer(buf, dtype="<f8").reshape(N, N).copy())
    return N, out
