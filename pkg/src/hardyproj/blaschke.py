"""Finite Blaschke products.

These are the inner functions of the toolkit: products of disk
automorphism factors (z - a)/(1 - conj(a) z) times a unimodular
constant.  Besides evaluation, the module solves boundary fibers
(all preimages of a point on the circle), computes the boundary
derivative modulus, and implements divisibility, gcd and composition
at the level of zero multisets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circlefft import GridFunction, check_grid_size, grid_points
from .errors import ConfigurationError, ConsistencyError, NumericError

MAX_ZERO_MODULUS = 1.0 - 1e-9
PAIRING_TOL = 1e-9
_FIBER_TOL = 1e-9
_NEAR_FIBER_GAP = 1e-6


def _zero_sort_key(a: complex):
    return (round(float(np.angle(a)), 12), abs(a), a.real, a.imag)


@dataclass(frozen=True)
class BlaschkeProduct:
    """Finite Blaschke product: zero multiset in the open disk plus a
    unimodular constant.  Zeros are kept in a canonical order so equal
    products compare and hash equal."""

    zeros: tuple = ()
    constant: complex = 1.0 + 0.0j

    def __post_init__(self):
        zs = tuple(sorted((complex(a) for a in self.zeros), key=_zero_sort_key))
        for a in zs:
            if abs(a) > MAX_ZERO_MODULUS:
                raise ConfigurationError(
                    f"zero {a} is not strictly inside the unit disk"
                )
        c = complex(self.constant)
        if abs(abs(c) - 1.0) > 1e-12:
            raise ConfigurationError(f"constant must be unimodular, got |c|={abs(c)}")
        object.__setattr__(self, "zeros", zs)
        object.__setattr__(self, "constant", c)

    @classmethod
    def monomial(cls, n: int, constant=1.0) -> "BlaschkeProduct":
        if n < 0:
            raise ConfigurationError("monomial degree must be nonnegative")
        return cls((0.0 + 0.0j,) * int(n), constant)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def is_monomial(self) -> bool:
        return all(a == 0 for a in self.zeros)

    def eval(self, z):
        """c * prod (z - a)/(1 - conj(a) z); unimodular for |z| = 1."""
        z = np.asarray(z, dtype=np.complex128)
        out = np.full(z.shape, self.constant, dtype=np.complex128)
        for a in self.zeros:
            den = 1.0 - np.conj(a) * z
            if np.any(np.abs(den) < 1e-14):
                raise NumericError("evaluation point too close to a pole")
            out = out * (z - a) / den
        return out if out.shape else complex(out)

    def at_origin(self) -> complex:
        return self.eval(0.0)

    def boundary_values(self, n: int = None) -> GridFunction:
        from .circlefft import DEFAULT_GRID

        n = check_grid_size(DEFAULT_GRID if n is None else n)
        return GridFunction(self.eval(grid_points(n)))

    def derivative_modulus(self, w) -> np.ndarray:
        """|B'(w)| for |w| = 1, via sum (1 - |a|^2)/|w - a|^2."""
        w = np.asarray(w, dtype=np.complex128)
        out = np.zeros(w.shape, dtype=float)
        for a in self.zeros:
            out += (1.0 - abs(a) ** 2) / np.abs(w - a) ** 2
        return out

    def to_json_dict(self) -> dict:
        return {
            "zeros": [[a.real, a.imag] for a in self.zeros],
            "constant": [self.constant.real, self.constant.imag],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "BlaschkeProduct":
        if d.get("type") == "monomial":
            return cls.monomial(int(d["n"]), complex(*d.get("constant", (1.0, 0.0))))
        zeros = [complex(re, im) for re, im in d.get("zeros", [])]
        cre, cim = d.get("constant", (1.0, 0.0))
        return cls(tuple(zeros), complex(cre, cim))


def boundary_derivative_modulus(b: BlaschkeProduct, n: int) -> GridFunction:
    """Samples of |B'| on the grid (real positive; equals deg(B) for z^n)."""
    return GridFunction(b.derivative_modulus(grid_points(n)).astype(np.complex128))


def _num_den_coeffs(b: BlaschkeProduct):
    # Highest-power-first coefficient arrays of prod(w - a) and prod(1 - conj(a) w).
    num = np.array([1.0 + 0.0j])
    den = np.array([1.0 + 0.0j])
    for a in b.zeros:
        num = np.convolve(num, np.array([1.0, -a]))
        den = np.convolve(den, np.array([-np.conj(a), 1.0]))
    return num, den


def _polish(b: BlaschkeProduct, zeta, w, iterations: int = 2):
    """Newton-polish roots w of c*num(w) - zeta*den(w); zeta scalar or (m,),
    w shaped (..., degree) compatible with zeta."""
    num, den = _num_den_coeffs(b)
    if np.ndim(zeta):
        coeffs = b.constant * num[:, None] - zeta[None, :] * den[:, None]
        coeffs = coeffs[:, :, None]  # (deg+1, m, 1) against w (m, deg)
    else:
        coeffs = b.constant * num - zeta * den
    deg = len(num) - 1
    for _ in range(iterations):
        pw = np.zeros_like(w)
        dpw = np.zeros_like(w)
        for j in range(deg + 1):
            pw = pw * w + coeffs[j]
        for j in range(deg):
            dpw = dpw * w + coeffs[j] * (deg - j)
        w = w - np.where(np.abs(dpw) > 0, pw / np.where(dpw == 0, 1, dpw), 0.0)
    return w


def fibers(b: BlaschkeProduct, zeta: complex) -> np.ndarray:
    """All deg(B) solutions w on the circle of B(w) = zeta, sorted by angle.

    Solves c*num(w) - zeta*den(w) = 0 by companion-matrix roots plus a
    Newton polish.  Raises if a root strays off the circle or leaves a
    residual above 1e-9.
    """
    if b.degree < 1:
        raise ConfigurationError("fibers require degree >= 1")
    zeta = complex(zeta)
    if abs(abs(zeta) - 1.0) > 1e-9:
        raise ConfigurationError("fiber target must lie on the unit circle")
    num, den = _num_den_coeffs(b)
    coeffs = b.constant * num - zeta * den
    w = np.roots(coeffs)
    w = _polish(b, zeta, w, iterations=3)
    if np.abs(np.abs(w) - 1.0).max() > _FIBER_TOL:
        raise ConsistencyError("fiber root not on the unit circle")
    resid = np.abs(b.eval(w) - zeta).max()
    if resid > _FIBER_TOL:
        raise NumericError(f"fiber residual {resid:.3e} exceeds tolerance")
    return w[np.argsort(np.angle(w) % (2.0 * np.pi))]


@dataclass(frozen=True)
class FiberStructure:
    """Boundary fibers of B over every grid point, with raw weights 1/|B'|."""

    points: np.ndarray       # (n, degree) unimodular, sorted by angle per row
    raw_weights: np.ndarray  # (n, degree) = 1 / |B'(point)|
    sums: np.ndarray         # (n,) row sums of raw_weights


_fiber_cache: dict = {}


def _solve_fibers_batched(b: BlaschkeProduct, zeta: np.ndarray) -> np.ndarray:
    d = b.degree
    num, den = _num_den_coeffs(b)
    coeffs = b.constant * num[None, :] - zeta[:, None] * den[None, :]
    lead = coeffs[:, 0]
    monic = coeffs / lead[:, None]
    m = zeta.shape[0]
    comp = np.zeros((m, d, d), dtype=np.complex128)
    for i in range(1, d):
        comp[:, i, i - 1] = 1.0
    # companion of monic w^d + c_{d-1} w^{d-1} + ... + c_0: last column
    # holds (-c_0, ..., -c_{d-1}) top to bottom
    comp[:, :, d - 1] = -monic[:, 1:][:, ::-1]
    w = np.linalg.eigvals(comp)
    w = _polish(b, zeta, w, iterations=2)
    order = np.argsort(np.angle(w) % (2.0 * np.pi), axis=1)
    return np.take_along_axis(w, order, axis=1)


def boundary_fiber_structure(b: BlaschkeProduct, n: int) -> FiberStructure:
    """Fibers of B over B(grid point) for every grid point, cached per (B, n)."""
    n = check_grid_size(n)
    key = (b, n)
    cached = _fiber_cache.get(key)
    if cached is not None:
        return cached
    z = grid_points(n)
    zeta = b.eval(z)
    zeta = zeta / np.abs(zeta)
    w = _solve_fibers_batched(b, zeta)
    if np.abs(np.abs(w) - 1.0).max() > _FIBER_TOL:
        raise ConsistencyError("batched fiber root not on the unit circle")
    resid = np.abs(b.eval(w) - zeta[:, None]).max()
    if resid > _FIBER_TOL:
        raise NumericError(f"batched fiber residual {resid:.3e} exceeds tolerance")
    if b.degree > 1:
        ang = np.sort(np.angle(w) % (2.0 * np.pi), axis=1)
        gaps = np.diff(np.concatenate([ang, ang[:, :1] + 2 * np.pi], axis=1), axis=1)
        close = gaps.min(axis=1) < _NEAR_FIBER_GAP
        if close.any():
            # re-solve near-critical rows at the half-step-rotated grid point
            shift = np.exp(1j * np.pi / n)
            zeta2 = b.eval(z[close] * shift)
            zeta2 = zeta2 / np.abs(zeta2)
            w2 = _solve_fibers_batched(b, zeta2)
            w = w.copy()
            w[close] = w2
    dm = b.derivative_modulus(w)
    raw = 1.0 / dm
    structure = FiberStructure(points=w, raw_weights=raw, sums=raw.sum(axis=1))
    _fiber_cache[key] = structure
    return structure


def _match_multisets(small, big, tol=PAIRING_TOL):
    """Greedy pairing of `small` into `big` within tol.

    Returns the list of matched (a, b) pairs, or None if some element of
    `small` has no unused partner.
    """
    big = list(big)
    used = [False] * len(big)
    pairs = []
    for a in small:
        best_j, best_d = -1, tol
        for j, bb in enumerate(big):
            if used[j]:
                continue
            d = abs(a - bb)
            if d <= best_d:
                best_j, best_d = j, d
        if best_j < 0:
            return None
        used[best_j] = True
        pairs.append((a, big[best_j]))
    return pairs


def divides(chi: BlaschkeProduct, b: BlaschkeProduct) -> bool:
    """True iff chi's zero multiset embeds into b's within the pairing tolerance."""
    return _match_multisets(chi.zeros, b.zeros) is not None


def gcd(b1: BlaschkeProduct, b2: BlaschkeProduct) -> BlaschkeProduct:
    """Greatest common divisor: multiplicity-respecting intersection of the
    zero multisets (zeros paired within 1e-9), with constant normalized to 1."""
    small, big = (b1, b2) if b1.degree <= b2.degree else (b2, b1)
    zeros = []
    remaining = list(big.zeros)
    for a in small.zeros:
        match = _match_multisets([a], remaining)
        if match is not None:
            _, partner = match[0]
            remaining.remove(partner)
            zeros.append((a + partner) / 2.0)
    return BlaschkeProduct(tuple(zeros), 1.0)


def compose_zeros(chi: BlaschkeProduct, eta: BlaschkeProduct) -> BlaschkeProduct:
    """The Blaschke product representing chi ∘ eta.

    Zeros are all disk solutions of eta(w) = a over the zeros a of chi,
    counted with multiplicity; the unimodular constant is fitted so that
    boundary values agree with pointwise composition.
    """
    if eta.degree < 1:
        raise ConfigurationError("composition requires deg(eta) >= 1")
    zeros = []
    num, den = _num_den_coeffs(eta)
    for a in chi.zeros:
        coeffs = eta.constant * num - complex(a) * den
        roots = np.roots(coeffs)
        # polish on the same polynomial
        for _ in range(3):
            pw = np.polyval(coeffs, roots)
            dpw = np.polyval(np.polyder(coeffs), roots)
            roots = roots - np.where(np.abs(dpw) > 0, pw / np.where(dpw == 0, 1, dpw), 0)
        inside = roots[np.abs(roots) < 1.0 - 1e-12]
        if len(inside) != eta.degree:
            raise ConsistencyError(
                f"expected {eta.degree} disk roots for eta(w) = {a}, got {len(inside)}"
            )
        zeros.extend(inside.tolist())
    candidate = BlaschkeProduct(tuple(zeros), 1.0)
    npts = 256
    pts = grid_points(npts)
    target = chi.eval(eta.eval(pts))
    ratio = target / candidate.eval(pts)
    c = ratio.mean()
    c = c / abs(c)
    err = np.abs(target - c * candidate.eval(pts)).max()
    if err > 1e-8:
        raise ConsistencyError(f"composition boundary mismatch {err:.3e}")
    return BlaschkeProduct(tuple(zeros), c)
