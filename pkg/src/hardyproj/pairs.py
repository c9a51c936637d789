"""Validated projection pairs.

A projection pair consists of an inner function vanishing at the origin
(the algebra generator, here a finite Blaschke product) and a unit-norm
analytic function whose inner and outer factors satisfy an orthogonality
constraint: with generator = xi * F and exponent p, the function
G = xi * F^(p/2) must be analytic and orthogonal to base * H^2.  Pairs
of this kind generate the contractive projections and the isometric
copies of the space realized by `lift`.

`canonicalize` rebuilds the distinguished pair from a seed function in
the range of a projection: the outer part is reconstructed from the
conditioned modulus, and the inner part is the smallest divisor of the
seed's inner factor whose quotient is measurable with respect to the
algebra generator.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .blaschke import BlaschkeProduct
from .circlefft import (
    DEFAULT_GRID,
    GridFunction,
    analyze,
    check_exponent,
    check_grid_size,
    eval_at_points,
    grid_points,
    negative_energy,
    pnorm,
)
from .condexp import condexp, measurability_residual
from .errors import (
    AliasingWarning,
    ConfigurationError,
    ConsistencyError,
    ContractViolation,
    DegenerateWeightError,
    PairValidationError,
)
from .factorize import inner_outer_split, outer_from_modulus, outer_power

ORIGIN_TOL = 1e-10
NORM_TOL = 1e-8
H2_TOL = 1e-7
ORTHO_TOL = 1e-7
MEASURABILITY_TOL = 1e-6
MAX_SEED_INNER_DEGREE = 12
# Membership tolerance used when factoring a candidate generator: fractional
# outer powers have slowly decaying spectra whose tail aliases into the
# negative bins at a few 1e-6 for a 4096-point grid, so the strict analytic
# tolerance would reject legitimate generators.
GENERATOR_HP_TOL = 1e-4


@dataclass(frozen=True)
class PairReport:
    """Per-condition residuals and verdicts for a candidate pair."""

    residuals: dict
    tolerances: dict
    passed: dict
    verdict: bool
    notes: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "tolerances": {k: float(v) for k, v in self.tolerances.items()},
            "passed": {k: bool(v) for k, v in self.passed.items()},
            "verdict": "pass" if self.verdict else "fail",
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class ProjectionPair:
    """A validated (base, generator, p) triple with the factorization attached."""

    base: BlaschkeProduct
    generator: GridFunction
    p: float
    gen_inner: GridFunction
    gen_outer: GridFunction
    report: PairReport

    @property
    def n(self) -> int:
        return self.generator.n

    def base_values(self) -> GridFunction:
        return self.base.boundary_values(self.n)

    def weight(self) -> GridFunction:
        """|generator|^p, the density of the pushforward-invariant measure."""
        return GridFunction((self.generator.modulus ** self.p).astype(complex))


def _validate(base: BlaschkeProduct, generator: GridFunction, p: float):
    p = check_exponent(p, allow_two=False)
    if base.degree < 1:
        raise ConfigurationError("algebra generator must have degree >= 1")
    origin = abs(base.at_origin())
    norm_defect = abs(pnorm(generator, p) - 1.0)
    gen_inner, gen_outer = inner_outer_split(generator, hp_tol=GENERATOR_HP_TOL)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AliasingWarning)
        g = gen_inner * outer_power(gen_outer, p / 2.0, hp_tol=GENERATOR_HP_TOL)
    h2 = negative_energy(g)
    eta_vals = base.boundary_values(generator.n)
    s = analyze(eta_vals.conj() * g)
    nonneg = np.abs(s.coeffs[s.freqs() >= 0])
    ortho = float(nonneg.max()) if nonneg.size else 0.0
    residuals = {
        "eta_at_origin": float(origin),
        "norm_defect": float(norm_defect),
        "h2_membership": float(h2),
        "eta_orthogonality": ortho,
    }
    tolerances = {
        "eta_at_origin": ORIGIN_TOL,
        "norm_defect": NORM_TOL,
        "h2_membership": H2_TOL,
        "eta_orthogonality": ORTHO_TOL,
    }
    passed = {k: residuals[k] <= tolerances[k] for k in residuals}
    report = PairReport(
        residuals=residuals,
        tolerances=tolerances,
        passed=passed,
        verdict=all(passed.values()),
    )
    return report, gen_inner, gen_outer


def validate_pair(base: BlaschkeProduct, generator: GridFunction, p) -> PairReport:
    """Check the pair conditions and report residuals; never raises on a
    mere failure (only on malformed inputs)."""
    report, _, _ = _validate(base, generator, float(p))
    return report


def make_pair(base: BlaschkeProduct, generator: GridFunction, p) -> ProjectionPair:
    """Validate and build a ProjectionPair; raises PairValidationError with
    the report attached if any condition fails."""
    report, gen_inner, gen_outer = _validate(base, generator, float(p))
    if not report.verdict:
        failing = [k for k, ok in report.passed.items() if not ok]
        raise PairValidationError(
            f"pair validation failed: {', '.join(failing)}", report=report
        )
    return ProjectionPair(
        base=base,
        generator=generator,
        p=float(p),
        gen_inner=gen_inner,
        gen_outer=gen_outer,
        report=report,
    )


def orthonormality_defect(pair: ProjectionPair, max_order: int = 8) -> float:
    """Largest defect among: the moments (1/N) sum base^j |generator|^p for
    1 <= |j| <= max_order, the unit mass at j = 0, and the deviation of
    E(|generator|^p | base) from the constant one."""
    w = pair.generator.modulus ** pair.p
    eta = pair.base.boundary_values(pair.n).samples
    worst = abs(float(np.mean(w)) - 1.0)
    power = np.ones_like(eta)
    for _ in range(max_order):
        power = power * eta
        moment = np.mean(power * w)
        worst = max(worst, abs(moment))  # negative orders are conjugates
    cond = condexp(pair.weight(), pair.base)
    worst = max(worst, float(np.abs(cond.samples - 1.0).max()))
    return worst


def lift(pair: ProjectionPair, f: GridFunction, hp_tol: float = 1e-8) -> GridFunction:
    """The isometry f -> generator * (f o base) onto the pair's subspace."""
    if f.n != pair.n:
        raise ConfigurationError("grid sizes differ")
    if negative_energy(f) > hp_tol:
        raise ContractViolation("lift requires a numerically analytic input")
    s = analyze(f)
    band = s.freqs()[np.abs(s.coeffs) > 1e-13 * max(np.abs(s.coeffs).max(), 1e-300)]
    if band.size and band.max() * pair.base.degree > pair.n // 2:
        warnings.warn(
            "composition exceeds the representable band; result is aliased",
            AliasingWarning,
            stacklevel=2,
        )
    composed = eval_at_points(f, pair.base_values().samples)
    return GridFunction(pair.generator.samples * composed)


def canonical_inner_divisor(
    base: BlaschkeProduct,
    seed_inner: BlaschkeProduct,
    n: int = DEFAULT_GRID,
    tol: float = MEASURABILITY_TOL,
):
    """Smallest sub-product chi of seed_inner's zeros such that chi/seed_inner
    is measurable with respect to the algebra of `base`.

    Returns (zeros, passing) where `passing` lists every sub-multiset that
    met the measurability tolerance.  Raises ConsistencyError if the
    minimal candidate fails to divide some other passing candidate.
    """
    n = check_grid_size(n)
    if seed_inner.degree > MAX_SEED_INNER_DEGREE:
        raise ConfigurationError(
            f"seed inner degree {seed_inner.degree} exceeds {MAX_SEED_INNER_DEGREE}"
        )
    z = grid_points(n)
    theta_vals = seed_inner.eval(z)
    zeros = seed_inner.zeros
    seen = set()
    candidates = []
    for size in range(len(zeros) + 1):
        for combo in itertools.combinations(range(len(zeros)), size):
            key = tuple(sorted((round(zeros[i].real, 12), round(zeros[i].imag, 12))
                               for i in combo))
            if key in seen:
                continue
            seen.add(key)
            candidates.append(tuple(zeros[i] for i in combo))
    passing = []
    for combo in candidates:
        chi = BlaschkeProduct(combo, 1.0)
        quotient = GridFunction(chi.eval(z) / theta_vals)
        if measurability_residual(quotient, base) <= tol:
            passing.append(combo)
    if not passing:
        raise ConsistencyError(
            "no measurable sub-product found; the full inner part should "
            "always qualify"
        )
    passing.sort(key=lambda c: (len(c), [(a.real, a.imag) for a in c]))
    minimal = passing[0]
    ties = [c for c in passing if len(c) == len(minimal)]
    if len(ties) > 1:
        raise ConsistencyError(
            "ambiguous minimal divisor: several minimal-degree sub-products pass"
        )
    chi_min = BlaschkeProduct(minimal, 1.0)
    for other in passing[1:]:
        from .blaschke import divides

        if not divides(chi_min, BlaschkeProduct(other, 1.0)):
            raise ConsistencyError(
                "minimal passing sub-product does not divide another passing one"
            )
    return minimal, passing


def canonicalize(
    base: BlaschkeProduct,
    seed: GridFunction,
    p,
    seed_inner_zeros,
    seed_inner_constant=1.0,
) -> ProjectionPair:
    """Distinguished pair construction from a seed function.

    The seed's inner part must be supplied as an explicit zero list (no
    recognition from samples is attempted).  The outer part of the result
    has modulus |seed| / E(|seed|^p | base)^(1/p); the inner part is the
    canonical divisor returned by :func:`canonical_inner_divisor`.  The
    resulting pair is validated; a failure raises PairValidationError with
    the report and construction details attached.
    """
    p = check_exponent(p, allow_two=False)
    if abs(base.at_origin()) > ORIGIN_TOL:
        raise ConfigurationError("algebra generator must vanish at the origin")
    n = seed.n
    seed_inner = BlaschkeProduct(tuple(seed_inner_zeros), seed_inner_constant)
    weight = GridFunction((seed.modulus ** p).astype(complex))
    conditioned = condexp(weight, base)
    dvals = conditioned.samples.real
    if dvals.min() < 1e-12:
        raise DegenerateWeightError(
            "conditioned seed modulus nearly vanishes; outer part undefined"
        )
    numer = outer_from_modulus(GridFunction(seed.modulus.astype(complex)))
    denom = outer_from_modulus(
        GridFunction((dvals ** (1.0 / p)).astype(complex)), check_aliasing=False
    )
    outer_part = GridFunction(numer.samples / denom.samples)
    xi_zeros, _ = canonical_inner_divisor(base, seed_inner, n)
    xi = BlaschkeProduct(xi_zeros, seed_inner.constant)
    candidate = GridFunction(xi.eval(grid_points(n)) * outer_part.samples)
    candidate = candidate * (1.0 / pnorm(candidate, p))
    try:
        return make_pair(base, candidate, p)
    except PairValidationError as err:
        err.details = {
            "xi_zeros": [complex(a) for a in xi_zeros],
            "candidate": candidate,
        }
        raise


def generator_from_spec(spec: dict, n: int = DEFAULT_GRID) -> GridFunction:
    """Build a generator from its JSON description.

    Forms: {"type": "poly", "coeffs": [...]},
    {"type": "outer_power", "base_poly": [...], "exponent": s},
    {"type": "power", "base": spec, "exponent": s} for outer powers of
    another spec, {"type": "product", "factors": [spec, ...]},
    {"type": "kernel", "pole": [re, im]} for c/(1 - conj(a) z),
    {"type": "exp_poly", "coeffs": [...]} for exp(polynomial).
    Coefficients may be numbers or [re, im] pairs.
    """
    kind = spec.get("type")
    if kind == "poly":
        return GridFunction.from_poly(_coeff_list(spec["coeffs"]), n)
    if kind == "outer_power":
        base = GridFunction.from_poly(_coeff_list(spec["base_poly"]), n)
        return outer_power(base, float(spec["exponent"]))
    if kind == "power":
        base = generator_from_spec(spec["base"], n)
        return outer_power(base, float(spec["exponent"]))
    if kind == "product":
        out = GridFunction.constant(1.0, n)
        for sub in spec["factors"]:
            out = out * generator_from_spec(sub, n)
        return out
    if kind == "kernel":
        a = _as_complex(spec["pole"])
        if abs(a) >= 1.0:
            raise ConfigurationError("kernel pole must lie inside the open disk")
        scale = float(np.sqrt(1.0 - abs(a) ** 2))
        z = grid_points(n)
        return GridFunction(scale / (1.0 - np.conj(a) * z))
    if kind == "blaschke":
        return BlaschkeProduct.from_json_dict(spec["product"]).boundary_values(n)
    if kind == "exp_poly":
        poly = GridFunction.from_poly(_coeff_list(spec["coeffs"]), n)
        return GridFunction(np.exp(poly.samples))
    raise ConfigurationError(f"unknown generator spec type {kind!r}")


def _as_complex(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _coeff_list(values):
    return [_as_complex(v) for v in values]
