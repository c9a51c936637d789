"""Conditional expectation with respect to the algebra generated by a
finite Blaschke product, plain and weighted.

The plain operator averages over boundary fibers with the disintegration
weights 1/|B'(w)|.  For an inner function vanishing at the origin these
weights sum to one over every fiber (the boundary measure is preserved),
which makes the average the conditional expectation; the raw weights are
kept as-is so that the origin-vanishing hypothesis stays visible to the
invariance checks.  For exact monomials z^n the operator is also
available as the Fourier multiplier keeping the frequencies divisible by
n; the two paths are cross-checked in the test suite.

The weighted variant E_w(g) = E(g*w)/E(w) is the conditional expectation
on the weighted space and is insensitive to the raw-weight convention,
since any fiber normalization cancels in the quotient.
"""

from __future__ import annotations

import warnings

import numpy as np

from .blaschke import BlaschkeProduct, boundary_fiber_structure
from .circlefft import (
    GridFunction,
    SpectralFunction,
    analyze,
    check_exponent,
    eval_at_points,
    synthesize,
)
from .errors import (
    AliasingWarning,
    ConfigurationError,
    DegenerateWeightError,
)

_TAIL_WARN_REL = 1e-5


def check_weight(w: GridFunction, total_mass: float = None, tol: float = 1e-10) -> np.ndarray:
    """Validate a weight function: real, nonnegative, mean at least 1e-8;
    optionally check the quadrature mass against an intended total."""
    vals = w.samples
    scale = max(np.abs(vals).max(), 1e-300)
    if np.abs(vals.imag).max() > 1e-10 * scale:
        raise ConfigurationError("weight samples must be real")
    re = vals.real
    if re.min() < -1e-10 * scale:
        raise ConfigurationError("weight samples must be nonnegative")
    re = np.maximum(re, 0.0)
    if re.mean() < 1e-8:
        raise DegenerateWeightError("weight mass below 1e-8")
    if total_mass is not None and abs(re.mean() - total_mass) > tol:
        raise ConfigurationError(
            f"weight mass {re.mean()!r} differs from intended {total_mass!r}"
        )
    return re


def _warn_if_full_band(f: GridFunction):
    s = analyze(f)
    mags = np.abs(s.coeffs)
    top = mags.max()
    if top == 0.0:
        return
    n = f.n
    k = s.freqs()
    tail = mags[np.abs(k) >= n // 2 - n // 16].max()
    if tail > _TAIL_WARN_REL * top:
        warnings.warn(
            "input spectrum reaches the Nyquist band; off-grid interpolation "
            "may be aliased",
            AliasingWarning,
            stacklevel=3,
        )


def _multiplier_condexp(f: GridFunction, degree: int) -> GridFunction:
    s = analyze(f)
    c = s.coeffs.copy()
    c[s.freqs() % degree != 0] = 0.0
    return synthesize(SpectralFunction(c))


def condexp(f: GridFunction, eta: BlaschkeProduct, method: str = "auto") -> GridFunction:
    """Fiber average of f over the level sets of eta.

    E(f|eta)(z) = sum over eta(w) = eta(z) of f(w) / |eta'(w)|, with f
    evaluated off-grid by spectral interpolation.  The weights sum to one
    over each fiber exactly when eta(0) = 0, making the average the
    conditional expectation for the boundary measure.

    method: "auto" picks the exact Fourier-multiplier form for monomial
    eta and fiber averaging otherwise; "fibers" and "multiplier" force a
    path (the latter only for monomials).
    """
    if eta.degree < 1:
        raise ConfigurationError("condexp requires deg(eta) >= 1")
    if method not in ("auto", "fibers", "multiplier"):
        raise ConfigurationError(f"unknown method {method!r}")
    if method == "multiplier" and not eta.is_monomial:
        raise ConfigurationError("multiplier path requires a monomial inner function")
    if method in ("auto", "multiplier") and eta.is_monomial:
        return _multiplier_condexp(f, eta.degree)
    _warn_if_full_band(f)
    structure = boundary_fiber_structure(eta, f.n)
    vals = eval_at_points(f, structure.points)
    return GridFunction((structure.raw_weights * vals).sum(axis=1))


def fiber_sum_defect(eta: BlaschkeProduct, n: int) -> float:
    """max |sum of 1/|eta'| over a fiber - 1| across the grid; vanishes
    exactly when eta(0) = 0 (measure preservation)."""
    if eta.is_monomial:
        return 0.0
    structure = boundary_fiber_structure(eta, n)
    return float(np.abs(structure.sums - 1.0).max())


def weighted_condexp(
    g: GridFunction,
    eta: BlaschkeProduct,
    w: GridFunction,
    method: str = "auto",
    floor: float = 1e-10,
) -> GridFunction:
    """Conditional expectation on the weighted space: E(g*w|eta) / E(w|eta).

    Reduces to condexp when w is constant 1; requires the conditioned
    weight to stay above `floor` at every sample.
    """
    wre = check_weight(w)
    den = condexp(GridFunction(wre.astype(complex)), eta, method)
    dre = den.samples.real
    if dre.min() < floor:
        raise DegenerateWeightError(
            f"conditioned weight reaches {dre.min():.3e}, below the floor {floor:.1e}"
        )
    num = condexp(g * w, eta, method)
    return GridFunction(num.samples / dre)


def averaging_residual(f: GridFunction, g: GridFunction, eta: BlaschkeProduct,
                       method: str = "auto") -> float:
    """sup |E(f*E(g|eta)|eta) - E(f|eta)*E(g|eta)|."""
    eg = condexp(g, eta, method)
    lhs = condexp(f * eg, eta, method)
    rhs = condexp(f, eta, method) * eg
    return float(np.abs(lhs.samples - rhs.samples).max())


def measurability_residual(g: GridFunction, eta: BlaschkeProduct,
                           method: str = "auto") -> float:
    """sup |g - E(g|eta)|; zero iff g is a function of eta at grid resolution."""
    return float(np.abs(g.samples - condexp(g, eta, method).samples).max())


def weighted_pnorm(g: GridFunction, w: GridFunction, p) -> float:
    """((1/N) sum w |g|^p)^(1/p) for a nonnegative weight w."""
    p = check_exponent(p)
    wre = check_weight(w)
    return float(np.mean(wre * np.abs(g.samples) ** p) ** (1.0 / p))
