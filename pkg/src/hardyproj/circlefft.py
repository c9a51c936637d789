"""Boundary functions on the unit circle.

Functions are represented by their values at the N uniform grid points
exp(2*pi*i*j/N).  The module provides the FFT bridge between samples and
Fourier coefficients, quadrature p-norms, the Riesz projection, the
Hilbert transform, and spectral interpolation at off-grid points.

Conventions
-----------
* N is a power of two, at least 64.
* Spectra are stored with frequencies k = -N/2 .. N/2-1 in increasing
  order (fftshift layout).  External JSON always labels coefficients by
  the integer k, never by array position.
* Quadrature is the uniform trapezoid rule (1/N) * sum, which is exact
  for trigonometric polynomials of degree below N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

DEFAULT_GRID = 4096
MIN_GRID = 64

# Band width (in modes) up to which interpolation uses direct Horner
# evaluation; wider spectra go through the upsampled-FFT path.
_HORNER_BAND = 256
_UPSAMPLE = 32
_STENCIL = 8

_angle_cache: dict[int, np.ndarray] = {}
_point_cache: dict[int, np.ndarray] = {}


def check_grid_size(n: int) -> int:
    n = int(n)
    if n < MIN_GRID or (n & (n - 1)) != 0:
        raise ConfigurationError(
            f"grid size must be a power of two >= {MIN_GRID}, got {n}"
        )
    return n


def grid_angles(n: int) -> np.ndarray:
    """Angles 2*pi*j/n for j = 0..n-1 (read-only array)."""
    n = check_grid_size(n)
    if n not in _angle_cache:
        th = 2.0 * np.pi * np.arange(n) / n
        th.setflags(write=False)
        _angle_cache[n] = th
    return _angle_cache[n]


def grid_points(n: int) -> np.ndarray:
    """The grid points exp(2*pi*i*j/n) (read-only array)."""
    n = check_grid_size(n)
    if n not in _point_cache:
        z = np.exp(1j * grid_angles(n))
        z.setflags(write=False)
        _point_cache[n] = z
    return _point_cache[n]


@dataclass(frozen=True)
class Exponent:
    """A Lebesgue exponent p with 1 <= p < infinity."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not np.isfinite(v) or v < 1.0:
            raise ConfigurationError(f"exponent must satisfy 1 <= p < inf, got {v}")
        object.__setattr__(self, "value", v)

    @property
    def is_two(self) -> bool:
        return abs(self.value - 2.0) < 1e-12

    def __float__(self) -> float:
        return self.value


def check_exponent(p, allow_two: bool = True) -> float:
    """Validate an exponent given as float or Exponent and return it as float."""
    p = float(p)
    if not np.isfinite(p) or p < 1.0:
        raise ConfigurationError(f"exponent must satisfy 1 <= p < inf, got {p}")
    if not allow_two and abs(p - 2.0) < 1e-12:
        raise ConfigurationError("p = 2 is excluded here; only p != 2 is supported")
    return p


def _pair_list(arr: np.ndarray) -> list:
    return [[float(v.real), float(v.imag)] for v in arr]


@dataclass(frozen=True)
class GridFunction:
    """Complex boundary samples at the N uniform grid points."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.complex128)
        if arr.ndim != 1:
            raise ConfigurationError("samples must be a one-dimensional array")
        check_grid_size(arr.shape[0])
        if not np.isfinite(arr.real).all() or not np.isfinite(arr.imag).all():
            raise ConfigurationError("samples must be finite (no NaN/Inf)")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.samples)

    def mean(self) -> complex:
        return complex(self.samples.mean())

    def conj(self) -> "GridFunction":
        return GridFunction(np.conj(self.samples))

    @classmethod
    def constant(cls, value, n: int = DEFAULT_GRID) -> "GridFunction":
        return cls(np.full(n, complex(value)))

    @classmethod
    def from_function(cls, fn, n: int = DEFAULT_GRID) -> "GridFunction":
        return cls(np.asarray(fn(grid_points(n)), dtype=np.complex128))

    @classmethod
    def from_poly(cls, coeffs, n: int = DEFAULT_GRID) -> "GridFunction":
        """Analytic polynomial sum(coeffs[k] * z**k) sampled on the grid."""
        z = grid_points(n)
        c = np.asarray(coeffs, dtype=np.complex128)
        out = np.zeros(n, dtype=np.complex128)
        for ck in c[::-1]:
            out = out * z + ck
        return cls(out)

    @classmethod
    def monomial(cls, k: int, n: int = DEFAULT_GRID) -> "GridFunction":
        return cls(grid_points(n) ** int(k))

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.n != self.n:
                raise ConfigurationError("grid sizes differ")
            return other.samples
        return complex(other)

    def __add__(self, other):
        return GridFunction(self.samples + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.samples - self._coerce(other))

    def __rsub__(self, other):
        return GridFunction(self._coerce(other) - self.samples)

    def __mul__(self, other):
        return GridFunction(self.samples * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.samples / self._coerce(other))

    def __rtruediv__(self, other):
        return GridFunction(self._coerce(other) / self.samples)

    def __neg__(self):
        return GridFunction(-self.samples)

    def to_json_dict(self) -> dict:
        return {"n": self.n, "samples": _pair_list(self.samples)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "GridFunction":
        arr = np.array([complex(re, im) for re, im in d["samples"]])
        if len(arr) != int(d["n"]):
            raise ConfigurationError("sample count does not match field 'n'")
        return cls(arr)


@dataclass(frozen=True)
class SpectralFunction:
    """Fourier coefficients indexed by k = -N/2 .. N/2-1 (fftshift layout)."""

    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.ndim != 1:
            raise ConfigurationError("coeffs must be a one-dimensional array")
        check_grid_size(arr.shape[0])
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    def freqs(self) -> np.ndarray:
        n = self.n
        return np.arange(n) - n // 2

    def coeff(self, k: int) -> complex:
        n = self.n
        if not -n // 2 <= k < n // 2:
            return 0.0 + 0.0j
        return complex(self.coeffs[k + n // 2])

    def to_json_dict(self, threshold: float = 1e-14) -> dict:
        ks = self.freqs()
        keep = np.abs(self.coeffs) > threshold
        return {
            "n": self.n,
            "coeffs": {
                str(int(k)): [float(c.real), float(c.imag)]
                for k, c in zip(ks[keep], self.coeffs[keep])
            },
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpectralFunction":
        n = check_grid_size(int(d["n"]))
        arr = np.zeros(n, dtype=np.complex128)
        for key, (re, im) in d["coeffs"].items():
            k = int(key)
            if not -n // 2 <= k < n // 2:
                raise ConfigurationError(f"frequency {k} outside [-{n//2}, {n//2})")
            arr[k + n // 2] = complex(re, im)
        return cls(arr)

    @classmethod
    def from_coeff_map(cls, cmap: dict, n: int) -> "SpectralFunction":
        n = check_grid_size(n)
        arr = np.zeros(n, dtype=np.complex128)
        for k, c in cmap.items():
            arr[int(k) + n // 2] = complex(c)
        return cls(arr)


def analyze(g: GridFunction) -> SpectralFunction:
    """Fourier coefficients (1/N) * sum_j samples[j] * exp(-2*pi*i*k*j/N)."""
    return SpectralFunction(np.fft.fftshift(np.fft.fft(g.samples)) / g.n)


def synthesize(s: SpectralFunction) -> GridFunction:
    """Inverse of :func:`analyze`."""
    return GridFunction(np.fft.ifft(np.fft.ifftshift(s.coeffs)) * s.n)


def mean(g: GridFunction) -> complex:
    return g.mean()


def pnorm(g: GridFunction, p) -> float:
    """((1/N) * sum |samples|^p)^(1/p)."""
    p = check_exponent(p)
    return float(np.mean(np.abs(g.samples) ** p) ** (1.0 / p))


def riesz(g: GridFunction) -> GridFunction:
    """Riesz projection: zero out all negative-frequency coefficients."""
    s = analyze(g)
    c = s.coeffs.copy()
    c[s.freqs() < 0] = 0.0
    return synthesize(SpectralFunction(c))


def hilbert(g: GridFunction) -> GridFunction:
    """Hilbert transform as the spectral multiplier -i*sign(k).

    With this convention hilbert(constant) = 0 and, as operators,
    I + i*H = 2*R - E where R is the Riesz projection and E the mean.
    """
    s = analyze(g)
    mult = -1j * np.sign(s.freqs()).astype(np.complex128)
    return synthesize(SpectralFunction(mult * s.coeffs))


def negative_energy(g: GridFunction) -> float:
    """Largest coefficient modulus over the negative frequencies."""
    s = analyze(g)
    neg = np.abs(s.coeffs[s.freqs() < 0])
    return float(neg.max()) if neg.size else 0.0


def effective_band(s: SpectralFunction, rel_tol: float = 1e-15) -> tuple[int, int]:
    """Smallest frequency window [kmin, kmax] holding all coefficients
    above rel_tol relative to the largest one.  Returns (0, 0) for zero."""
    mags = np.abs(s.coeffs)
    top = mags.max()
    if top == 0.0:
        return (0, 0)
    ks = s.freqs()[mags > rel_tol * top]
    return (int(ks.min()), int(ks.max()))


def _lagrange_weights(frac: np.ndarray) -> np.ndarray:
    # Equispaced nodes -3..4 around the bracketing fine-grid cell.
    nodes = np.arange(-(_STENCIL // 2 - 1) - 1, _STENCIL // 2 + 1)  # -3..4
    w = np.ones((frac.shape[0], _STENCIL))
    for j, nj in enumerate(nodes):
        for l, nl in enumerate(nodes):
            if l != j:
                w[:, j] *= (frac - nl) / (nj - nl)
    return w


def eval_at_points(g: GridFunction, points: np.ndarray) -> np.ndarray:
    """Evaluate the truncated Fourier series of g at unimodular points.

    Exact (to rounding) for band-limited g.  Narrow spectra are evaluated
    by Horner's rule; wide spectra via a 32x zero-padded FFT followed by
    8-point local Lagrange interpolation, accurate to ~1e-13 relative.
    """
    pts = np.asarray(points, dtype=np.complex128)
    shape = pts.shape
    pts = pts.ravel()
    s = analyze(g)
    if np.abs(s.coeffs).max() == 0.0:
        return np.zeros(shape, dtype=np.complex128)
    kmin, kmax = effective_band(s)
    if kmax - kmin <= _HORNER_BAND:
        c = s.coeffs[(s.freqs() >= kmin) & (s.freqs() <= kmax)]
        out = np.zeros_like(pts)
        for ck in c[::-1]:
            out = out * pts + ck
        return (out * pts ** kmin).reshape(shape)
    n = g.n
    m = _UPSAMPLE * n
    unshifted = np.fft.ifftshift(s.coeffs)
    padded = np.zeros(m, dtype=np.complex128)
    padded[: n // 2] = unshifted[: n // 2]
    padded[m - n // 2 :] = unshifted[n // 2 :]
    fine = np.fft.ifft(padded) * m
    x = (np.angle(pts) % (2.0 * np.pi)) / (2.0 * np.pi / m)
    i0 = np.floor(x).astype(np.int64)
    frac = x - i0
    offs = np.arange(-(_STENCIL // 2 - 1) - 1, _STENCIL // 2 + 1)
    idx = (i0[:, None] + offs[None, :]) % m
    out = (fine[idx] * _lagrange_weights(frac)).sum(axis=1)
    return out.reshape(shape)
