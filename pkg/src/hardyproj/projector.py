"""The contractive projection attached to a validated pair, with its
extension to the whole boundary space, orthogonality certificates, an
operator-norm lower-bound oracle, the even-exponent counterexample, and
the invariance check for conditional expectations.

With generator phi and algebra generator eta, the projection acts as

    P f = phi * E((f/phi) * |phi|^p | eta) / E(|phi|^p | eta),

which on analytic inputs reproduces the subspace phi * (H^p o eta) and
fixes it.  Division by phi is floored at a configurable level; the
fixtures only vanish at isolated points, so floored samples stay rare.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from ._ascent import ratio_ascent
from .blaschke import BlaschkeProduct
from .circlefft import (
    DEFAULT_GRID,
    GridFunction,
    analyze,
    check_exponent,
    check_grid_size,
    grid_points,
    negative_energy,
    pnorm,
)
from .condexp import condexp
from .errors import (
    AliasingWarning,
    ConfigurationError,
    ContractViolation,
    DegenerateDivisionError,
    DegenerateWeightError,
)
from .pairs import ProjectionPair

HP_INPUT_TOL = 1e-8
DIVISION_FLOOR = 1e-12
FLOOR_BUDGET = 1e-3
CERT_TOL = 1e-8
_ZERO_SET_TOL = 1e-9


class Projection:
    """P = phi * E_phi(./phi | eta) realized on grid data."""

    def __init__(self, pair: ProjectionPair, division_floor: float = DIVISION_FLOOR):
        self.pair = pair
        self.division_floor = float(division_floor)
        phi = pair.generator.samples
        self._phi = phi
        absphi = np.abs(phi)
        floored = absphi < self.division_floor
        if floored.mean() > FLOOR_BUDGET:
            raise DegenerateDivisionError(
                f"{100 * floored.mean():.2f}% of generator samples fall below "
                f"the division floor {self.division_floor:.1e}"
            )
        self._absphi = absphi
        self._abs_floored = np.maximum(absphi, self.division_floor)
        self._weight = GridFunction((absphi ** pair.p).astype(complex))
        self._denominator = {}

    @property
    def n(self) -> int:
        return self.pair.n

    def _den(self, method: str) -> np.ndarray:
        if method not in self._denominator:
            den = condexp(self._weight, self.pair.base, method).samples.real
            if den.min() < 1e-10:
                raise DegenerateWeightError(
                    "conditioned weight nearly vanishes; projection undefined"
                )
            self._denominator[method] = den
        return self._denominator[method]

    def _core(self, f: GridFunction, method: str) -> GridFunction:
        p = self.pair.p
        # (f/phi) * |phi|^p written as f * (conj(phi)/|phi|) * |phi|^(p-1),
        # with |phi| floored; bounded for every p >= 1.
        sgn = np.conj(self._phi) / self._abs_floored
        integrand = GridFunction(f.samples * sgn * self._abs_floored ** (p - 1.0))
        num = condexp(integrand, self.pair.base, method)
        return GridFunction(self._phi * num.samples / self._den(method))

    def apply(self, f: GridFunction, method: str = "auto") -> GridFunction:
        """Projection of an analytic input; raises if f is visibly not in
        the analytic class (use apply_extended for arbitrary inputs)."""
        if negative_energy(f) > HP_INPUT_TOL:
            raise ContractViolation(
                "input has negative-frequency energy; use apply_extended"
            )
        return self._core(f, method)

    def apply_extended(self, f: GridFunction, method: str = "auto") -> GridFunction:
        """The same formula on an arbitrary boundary function."""
        return self._core(f, method)


def apply_P(op: Projection, f: GridFunction, method: str = "auto") -> GridFunction:
    return op.apply(f, method)


def apply_Pext(op: Projection, f: GridFunction, method: str = "auto") -> GridFunction:
    return op.apply_extended(f, method)


@dataclass(frozen=True)
class Certificate:
    """Outcome of an orthogonality certificate for a projection."""

    kind: str            # "lemma21" (p > 1) or "lemma22" (p = 1)
    residual: float      # scale-normalized worst pairing
    scale: float
    verdict: bool
    digest: str
    worst_pair: tuple
    tolerance: float

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "residual": self.residual,
            "scale": self.scale,
            "verdict": "pass" if self.verdict else "fail",
            "digest": self.digest,
            "worst_pair": list(self.worst_pair),
            "tolerance": self.tolerance,
        }


def _digest(arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.round(np.asarray(a, dtype=np.complex128), 12).tobytes())
    return h.hexdigest()[:16]


def _sgn(values: np.ndarray) -> np.ndarray:
    mags = np.abs(values)
    return np.where(mags > 0, values / np.where(mags == 0, 1.0, mags), 0.0)


def _random_analytic(rng, degree: int, n: int) -> GridFunction:
    coeffs = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    return GridFunction.from_poly(coeffs, n)


def certify_contractive(
    op,
    p,
    range_samples=None,
    kernel_samples=None,
    n_samples: int = 16,
    degree: int = 24,
    seed: int = 0,
    zero_tol: float = _ZERO_SET_TOL,
    tolerance: float = CERT_TOL,
) -> Certificate:
    """Orthogonality certificate for a projection.

    For p > 1 the pairing max |(1/N) sum |g|^(p-1) sgn(g) conj(k)| over
    range samples g and kernel samples k must vanish; for p = 1 the
    pairing |(1/N) sum sgn(g) conj(k)| must not exceed the mass of |k|
    on the numerical zero set of g.  Kernel samples default to f - P f
    for random analytic polynomials f, which lie in the kernel up to the
    idempotence error; range samples default to P f.
    """
    p = check_exponent(p)
    apply = op.apply_extended if isinstance(op, Projection) else op
    if range_samples is None or kernel_samples is None:
        rng = np.random.default_rng(seed)
        gens = [
            _random_analytic(rng, degree, op.n if isinstance(op, Projection) else DEFAULT_GRID)
            for _ in range(n_samples)
        ]
        if range_samples is None:
            range_samples = [apply(f) for f in gens]
        if kernel_samples is None:
            kernel_samples = [f - apply(f) for f in gens]
    if not range_samples or not kernel_samples:
        raise ConfigurationError("certificates need nonempty sample lists")
    kind = "lemma22" if abs(p - 1.0) < 1e-12 else "lemma21"
    worst = -np.inf
    worst_pair = (0, 0)
    scale = 0.0
    for i, g in enumerate(range_samples):
        gs = g.samples
        gnorm = pnorm(g, p)
        if kind == "lemma21":
            density = np.abs(gs) ** (p - 1.0) * _sgn(gs)
        else:
            density = _sgn(gs)
            zero_set = np.abs(gs) <= zero_tol
        for j, k in enumerate(kernel_samples):
            ks = k.samples
            pair_scale = max(gnorm ** (p - 1.0) * pnorm(k, p), 1e-300)
            integral = abs(np.mean(density * np.conj(ks)))
            if kind == "lemma22":
                bound = float(np.mean(np.abs(ks) * zero_set))
                value = max(integral - bound, 0.0) / pair_scale
            else:
                value = integral / pair_scale
            scale = max(scale, pair_scale)
            if value > worst:
                worst = value
                worst_pair = (i, j)
    digest = _digest([g.samples for g in range_samples]
                     + [k.samples for k in kernel_samples])
    return Certificate(
        kind=kind,
        residual=float(worst),
        scale=float(scale),
        verdict=bool(worst <= tolerance),
        digest=digest,
        worst_pair=worst_pair,
        tolerance=tolerance,
    )


def _sampling_matrix(exponents, quad_n: int) -> np.ndarray:
    z = grid_points(quad_n)
    return z[:, None] ** np.asarray(exponents, dtype=np.int64)[None, :]


def estimate_opnorm(
    op,
    p,
    dim: int,
    trials: int = 64,
    steps: int = 200,
    seed: int = 0,
    basis_exponents=None,
    quad_n: int = 512,
) -> float:
    """Lower bound for the operator p-norm on a truncated monomial basis.

    `op` is a (dim x dim) matrix acting on coefficient vectors relative to
    z^basis_exponents, or a callable mapping coefficient vectors to
    coefficient vectors, which is materialized column by column.  The
    bound is the best ratio found by seeded multi-restart coordinate
    ascent and never exceeds the true discrete norm.
    """
    p = check_exponent(p)
    quad_n = check_grid_size(quad_n)
    if basis_exponents is None:
        basis_exponents = list(range(dim))
    if len(basis_exponents) != dim:
        raise ConfigurationError("basis size does not match dim")
    if callable(op) and not isinstance(op, np.ndarray):
        cols = []
        for i in range(dim):
            e = np.zeros(dim, dtype=np.complex128)
            e[i] = 1.0
            cols.append(np.asarray(op(e), dtype=np.complex128))
        matrix = np.stack(cols, axis=1)
    else:
        matrix = np.asarray(op, dtype=np.complex128)
    sample = _sampling_matrix(basis_exponents, quad_n)
    weights = np.full(quad_n, 1.0 / quad_n)
    ones = np.ones(dim, dtype=np.complex128)
    recip = np.array(
        [0.0 if e == 0 else 1.0 / e for e in basis_exponents], dtype=np.complex128
    )
    alternating = np.array([(-1.0) ** i for i in range(dim)], dtype=np.complex128)
    return ratio_ascent(
        sample @ matrix,
        sample,
        weights,
        p,
        restarts=trials,
        steps=steps,
        seed=seed,
        extra_starts=(ones, recip, alternating),
    )


def counterexample_even(
    k: int,
    degree_cap: int = None,
    p=None,
    n: int = 512,
    seed: int = 0,
    opnorm_trials: int = 32,
    opnorm_steps: int = 240,
) -> dict:
    """The even-exponent boundary phenomenon on span{1, z, z^(k+1), ...}.

    Keeping only the coefficients of 1 and z is contractive at p = 2k
    (certified through the orthogonality pairing, which vanishes by
    spectral support), yet the coordinate function z lies in the range
    while the operator is not the identity, so it is no conditional
    expectation.  At the odd exponent 2k - 1 the same truncation has
    norm strictly above one; the ascent lower bound witnesses that.
    """
    k = int(k)
    if k < 1:
        raise ConfigurationError("k must be a positive integer")
    p = 2 * k if p is None else float(p)
    if abs(p - 2 * k) > 1e-12:
        raise ConfigurationError("the example requires p = 2k")
    cap = int(degree_cap) if degree_cap is not None else k + 6
    if cap < k + 4:
        raise ConfigurationError("degree cap must be at least k + 4")
    n = check_grid_size(n)

    def keep_low(f: GridFunction) -> GridFunction:
        s = analyze(f)
        c = s.coeffs.copy()
        c[(s.freqs() != 0) & (s.freqs() != 1)] = 0.0
        from .circlefft import SpectralFunction, synthesize

        return synthesize(SpectralFunction(c))

    rng = np.random.default_rng(seed)
    range_samples = []
    for _ in range(8):
        a, b = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        range_samples.append(GridFunction.from_poly([a, b], n))
    kernel_samples = [GridFunction.monomial(j, n) for j in range(k + 1, cap + 1)]
    for _ in range(4):
        coeffs = np.zeros(cap + 1, dtype=np.complex128)
        coeffs[k + 1 :] = rng.standard_normal(cap - k) + 1j * rng.standard_normal(cap - k)
        kernel_samples.append(GridFunction.from_poly(coeffs, n))
    cert = certify_contractive(
        keep_low, float(p), range_samples, kernel_samples
    )
    exponents = [0, 1] + list(range(k + 1, cap + 1))
    dim = len(exponents)
    matrix = np.diag([1.0 if e in (0, 1) else 0.0 for e in exponents])
    odd_p = 2 * k - 1
    odd_norm = estimate_opnorm(
        matrix,
        odd_p,
        dim,
        trials=opnorm_trials,
        steps=opnorm_steps,
        seed=seed + 1,
        basis_exponents=exponents,
    )
    z_image = keep_low(GridFunction.monomial(1, n))
    high_image = keep_low(GridFunction.monomial(k + 1, n))
    return {
        "p": float(p),
        "degree_cap": cap,
        "certificate": cert,
        "odd_exponent": float(odd_p),
        "odd_opnorm_lower_bound": float(odd_norm),
        "witness": {
            "z_fixed_residual": float(
                np.abs(z_image.samples - grid_points(n)).max()
            ),
            "not_identity_residual": float(np.abs(high_image.samples).max()),
        },
    }


def aleksandrov_check(
    eta: BlaschkeProduct, max_power: int = 16, n: int = DEFAULT_GRID
) -> float:
    """Largest negative-frequency energy of condexp(z^k, eta), 0 <= k <= K.

    Small when the inner function vanishes at the origin (the fiber
    average then preserves analyticity); for a generator with eta(0) != 0
    the raw fiber average leaks macroscopic negative energy.
    """
    if eta.degree < 1:
        raise ConfigurationError("check requires degree >= 1")
    n = check_grid_size(n)
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingWarning)
        for k in range(max_power + 1):
            e = condexp(GridFunction.monomial(k, n), eta)
            worst = max(worst, negative_energy(e))
    return worst
