"""Scenario runner and report emitter.

A scenario file names its fixtures (projection pairs, Blaschke products,
finite spaces, counterexample parameters) and the checks to run against
them.  Reports are deterministic given the seed and grid size: checks
derive their random streams from the master seed and the check name,
rows are sorted, and floats are serialized with their shortest
round-trip representation.

Exit codes: 0 all checks pass, 1 some check failed or rejected its
input, 2 the scenario file is malformed.
"""

from __future__ import annotations

import argparse
import json
import sys
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import __version__
from .blaschke import BlaschkeProduct, compose_zeros, gcd
from .circlefft import (
    DEFAULT_GRID,
    GridFunction,
    analyze,
    check_grid_size,
    grid_points,
    hilbert,
    negative_energy,
    pnorm,
    riesz,
    synthesize,
)
from .condexp import condexp, fiber_sum_defect, measurability_residual
from .errors import (
    ConfigurationError,
    ContractViolation,
    DegenerateDivisionError,
    DegenerateWeightError,
    ModulusGuardError,
    ToolkitError,
)
from .factorize import OuterSpec, outer_from_modulus, outer_power
from .finitespace import (
    FinitePartition,
    FiniteSpace,
    block_means,
    condexp_matrix,
    lemma32_check,
    oracle_pnorm,
    orthogonal_projection,
    partitions_iter,
    random_oblique_projection,
    sigma_from_functions,
    theorem31_probe,
)
from .pairs import generator_from_spec, lift, make_pair, validate_pair
from .projector import (
    Projection,
    aleksandrov_check,
    certify_contractive,
    counterexample_even,
)

_REJECTABLE = (
    ModulusGuardError,
    DegenerateWeightError,
    DegenerateDivisionError,
    ContractViolation,
)


# --------------------------------------------------------------------------
# context and fixtures


@dataclass
class RunContext:
    name: str
    n: int
    seed: int
    tol_scale: float
    inputs: dict
    _pairs: list = field(default_factory=list)
    _valid: dict = field(default_factory=dict)

    def rng(self, check_name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(check_name.encode())])

    def pair_fixtures(self) -> list:
        if not self._pairs and self.inputs.get("pairs"):
            for entry in self.inputs["pairs"]:
                self._pairs.append(
                    {
                        "id": entry["id"],
                        "base": BlaschkeProduct.from_json_dict(entry["base"]),
                        "generator": generator_from_spec(entry["generator"], self.n),
                        "p": float(entry["p"]),
                    }
                )
        return self._pairs

    def valid_pair(self, fixture: dict):
        key = fixture["id"]
        if key not in self._valid:
            self._valid[key] = make_pair(
                fixture["base"], fixture["generator"], fixture["p"]
            )
        return self._valid[key]

    def blaschke_fixtures(self) -> list:
        return [
            {"id": e["id"], "product": BlaschkeProduct.from_json_dict(e["product"])}
            for e in self.inputs.get("blaschke", [])
        ]

    def space_fixtures(self) -> list:
        return [
            {"id": e["id"], "space": FiniteSpace(tuple(e["weights"]))}
            for e in self.inputs.get("spaces", [])
        ]


def _random_poly(rng, degree: int, n: int) -> GridFunction:
    c = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
    return GridFunction.from_poly(c, n)


def _random_bandlimited(rng, band: int, n: int) -> GridFunction:
    from .circlefft import SpectralFunction

    c = np.zeros(n, dtype=np.complex128)
    k = np.arange(n) - n // 2
    sel = np.abs(k) <= band
    c[sel] = rng.standard_normal(sel.sum()) + 1j * rng.standard_normal(sel.sum())
    return synthesize(SpectralFunction(c))


def _positive_trig_poly(rng, degree: int, n: int) -> np.ndarray:
    z = grid_points(n)
    vals = np.zeros(n)
    for j in range(1, degree + 1):
        a, b = rng.standard_normal(2) * 0.5 / j
        vals += a * np.cos(j * np.angle(z)) + b * np.sin(j * np.angle(z))
    return vals - vals.min() + 0.5


# --------------------------------------------------------------------------
# check registry


@dataclass(frozen=True)
class CheckDef:
    name: str
    ref: str
    tolerance: float
    mode: str  # "max": residual <= tol passes;  "min": residual >= tol passes
    runner: object


CHECKS: dict[str, CheckDef] = {}


def _register(name, ref, tolerance, mode="max"):
    def wrap(fn):
        CHECKS[name] = CheckDef(name, ref, tolerance, mode, fn)
        return fn

    return wrap


@_register("fft_roundtrip", "discrete Fourier analysis", 1e-12)
def _chk_roundtrip(ctx, params):
    rng = ctx.rng("fft_roundtrip")
    worst = 0.0
    for _ in range(10):
        f = _random_bandlimited(rng, ctx.n // 4, ctx.n)
        back = synthesize(analyze(f))
        worst = max(
            worst,
            float(np.abs(back.samples - f.samples).max() / np.abs(f.samples).max()),
        )
    return [{"fixture": "random", "residual": worst}]


@_register("parseval", "Parseval identity", 1e-12)
def _chk_parseval(ctx, params):
    rng = ctx.rng("parseval")
    worst = 0.0
    for _ in range(10):
        f = _random_bandlimited(rng, ctx.n // 4, ctx.n)
        lhs = float((np.abs(analyze(f).coeffs) ** 2).sum())
        rhs = float(np.mean(np.abs(f.samples) ** 2))
        worst = max(worst, abs(lhs - rhs) / rhs)
    return [{"fixture": "random", "residual": worst}]


@_register("pnorm_homogeneity", "norm homogeneity", 1e-12)
def _chk_homog(ctx, params):
    rng = ctx.rng("pnorm_homogeneity")
    worst = 0.0
    for p in (1.0, 4.0 / 3.0, 2.0, 3.0, 4.0):
        f = _random_poly(rng, 16, ctx.n)
        c = complex(*rng.standard_normal(2))
        worst = max(
            worst, abs(pnorm(f * c, p) - abs(c) * pnorm(f, p)) / max(pnorm(f, p), 1e-300)
        )
    return [{"fixture": "random", "residual": worst}]


@_register("riesz_idempotent", "Riesz projection", 1e-12)
def _chk_riesz(ctx, params):
    rng = ctx.rng("riesz_idempotent")
    f = _random_bandlimited(rng, ctx.n // 4, ctx.n)
    r1 = riesz(f)
    r2 = riesz(r1)
    return [
        {
            "fixture": "random",
            "residual": float(np.abs(r2.samples - r1.samples).max()),
        }
    ]


@_register("hilbert_identity", "I + iH = 2R - E", 1e-10)
def _chk_hilbert(ctx, params):
    rng = ctx.rng("hilbert_identity")
    worst = 0.0
    for _ in range(20):
        f = _random_bandlimited(rng, ctx.n // 4, ctx.n)
        lhs = f + hilbert(f) * 1j
        rhs = riesz(f) * 2.0 - f.mean()
        worst = max(worst, float(np.abs(lhs.samples - rhs.samples).max()))
    return [{"fixture": "random", "residual": worst}]


@_register("blaschke_boundary_modulus", "inner functions are unimodular on the circle", 1e-9)
def _chk_bmod(ctx, params):
    rows = []
    for fix in ctx.blaschke_fixtures():
        vals = fix["product"].boundary_values(ctx.n)
        rows.append(
            {
                "fixture": fix["id"],
                "residual": float(np.abs(np.abs(vals.samples) - 1.0).max()),
            }
        )
    return rows


@_register("fiber_measure_preservation",
           "inner functions vanishing at the origin preserve the measure", 1e-8)
def _chk_fiber_sum(ctx, params):
    rows = []
    for fix in ctx.blaschke_fixtures():
        b = fix["product"]
        if abs(b.at_origin()) > 1e-10 or b.degree < 1:
            continue
        rows.append(
            {"fixture": fix["id"], "residual": fiber_sum_defect(b, ctx.n)}
        )
    return rows


@_register("blaschke_gcd_composition", "Lemma 4.14", 1e-8)
def _chk_gcd_comp(ctx, params):
    rng = ctx.rng("blaschke_gcd_composition")
    count = int(params.get("count", 12))
    worst = 0.0

    def rand_zero():
        r = 0.15 + 0.55 * rng.random()
        return r * np.exp(2j * np.pi * rng.random())

    for _ in range(count):
        shared = [rand_zero() for _ in range(rng.integers(0, 3))]
        chi1 = BlaschkeProduct(tuple(shared + [rand_zero() for _ in range(rng.integers(0, 2))]))
        chi2 = BlaschkeProduct(tuple(shared + [rand_zero() for _ in range(rng.integers(0, 2))]))
        eta = BlaschkeProduct((0.0,) + tuple(rand_zero() for _ in range(rng.integers(0, 3))))
        lhs = gcd(compose_zeros(chi1, eta), compose_zeros(chi2, eta))
        rhs = compose_zeros(gcd(chi1, chi2), eta)
        if lhs.degree != rhs.degree:
            worst = max(worst, 1.0)
            continue
        a = sorted(lhs.zeros, key=lambda w: (w.real, w.imag))
        b = sorted(rhs.zeros, key=lambda w: (w.real, w.imag))
        if a:
            worst = max(worst, float(max(abs(x - y) for x, y in zip(a, b))))
    return [{"fixture": "random-triples", "residual": worst}]


@_register("outer_modulus_fidelity", "Eq. (4.6)", 1e-8)
def _chk_outer_mod(ctx, params):
    rng = ctx.rng("outer_modulus_fidelity")
    z = grid_points(ctx.n)
    worst = 0.0
    moduli = [
        np.abs(1 + z),
        np.abs((1 + z) * (1 - 0.5 * z)),
        _positive_trig_poly(rng, 3, ctx.n),
        np.exp(np.cos(np.angle(z))),
    ]
    for m in moduli:
        spec = OuterSpec(GridFunction(m.astype(complex)))
        f = outer_from_modulus(spec)
        clipped = np.maximum(m, np.exp(spec.log_floor))
        worst = max(
            worst, float(np.abs(np.abs(f.samples) - clipped).max() / clipped.max())
        )
    return [{"fixture": "moduli", "residual": worst}]


@_register("outer_analyticity", "Eq. (4.6)", 1e-8)
def _chk_outer_analytic(ctx, params):
    rng = ctx.rng("outer_analyticity")
    z = grid_points(ctx.n)
    worst = 0.0
    for m in (np.abs(1 + z), _positive_trig_poly(rng, 4, ctx.n),
              np.exp(0.7 * np.cos(np.angle(z)))):
        f = outer_from_modulus(GridFunction(m.astype(complex)))
        worst = max(worst, negative_energy(f))
    return [{"fixture": "moduli", "residual": worst}]


@_register("outer_power_semigroup", "Definition 1.1(3)", 1e-8)
def _chk_outer_semigroup(ctx, params):
    rng = ctx.rng("outer_power_semigroup")
    f = outer_from_modulus(
        GridFunction(_positive_trig_poly(rng, 3, ctx.n).astype(complex))
    )
    worst = 0.0
    for s, t in ((0.5, 0.5), (1.5, 0.25), (2.0, 1.0)):
        lhs = outer_power(f, s) * outer_power(f, t)
        rhs = outer_power(f, s + t)
        worst = max(
            worst,
            float(np.abs(lhs.samples - rhs.samples).max()
                  / np.abs(rhs.samples).max()),
        )
    return [{"fixture": "random-outer", "residual": worst}]


@_register("outer_measurable_modulus", "Lemma 4.13", 1e-6)
def _chk_outer_measurable(ctx, params):
    rng = ctx.rng("outer_measurable_modulus")
    rows = []
    alek = ctx.inputs.get("aleksandrov", {})
    for entry in alek.get("vanishing", []):
        b = BlaschkeProduct.from_json_dict(entry["product"])
        hvals = _positive_trig_poly(rng, 2, 64)
        hcoef = np.fft.fft(hvals) / 64
        eta_vals = b.boundary_values(ctx.n).samples
        m = np.full(ctx.n, hcoef[0].real)
        for j in range(1, 3):
            m = m + 2 * (hcoef[-j] * eta_vals ** j).real
        m = np.maximum(m, 0.05)
        f = outer_from_modulus(GridFunction(m.astype(complex)))
        rows.append(
            {"fixture": entry["id"], "residual": measurability_residual(f, b)}
        )
    return rows


@_register("condexp_dual_path", "conditional expectation, multiplier form", 1e-9)
def _chk_dual(ctx, params):
    rng = ctx.rng("condexp_dual_path")
    rows = []
    for fix in ctx.blaschke_fixtures():
        b = fix["product"]
        if not b.is_monomial:
            continue
        worst = 0.0
        for _ in range(5):
            f = _random_bandlimited(rng, 48, ctx.n)
            a = condexp(f, b, method="multiplier")
            c = condexp(f, b, method="fibers")
            worst = max(worst, float(np.abs(a.samples - c.samples).max()))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("condexp_contraction", "conditional expectation properties (1)-(3)", 1e-8)
def _chk_ce_contract(ctx, params):
    rng = ctx.rng("condexp_contraction")
    rows = []
    for fix in ctx.blaschke_fixtures():
        b = fix["product"]
        if abs(b.at_origin()) > 1e-10:
            continue
        worst = 0.0
        for p in (1.0, 4.0 / 3.0, 2.0, 3.0, 4.0):
            for _ in range(5):
                f = _random_bandlimited(rng, 32, ctx.n)
                e = condexp(f, b)
                worst = max(worst, max(0.0, pnorm(e, p) / pnorm(f, p) - 1.0))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("condexp_positivity", "conditional expectation properties (1)-(3)", 1e-10)
def _chk_ce_positive(ctx, params):
    rng = ctx.rng("condexp_positivity")
    rows = []
    for fix in ctx.blaschke_fixtures():
        b = fix["product"]
        if abs(b.at_origin()) > 1e-10:
            continue
        worst = 0.0
        for _ in range(5):
            f = GridFunction(_positive_trig_poly(rng, 8, ctx.n).astype(complex))
            e = condexp(f, b)
            worst = max(worst, max(0.0, -float(e.samples.real.min())))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("condexp_averaging", "conditional expectation properties (1)-(3)", 1e-7)
def _chk_ce_avg(ctx, params):
    from .condexp import averaging_residual

    rng = ctx.rng("condexp_averaging")
    rows = []
    for fix in ctx.blaschke_fixtures():
        b = fix["product"]
        worst = 0.0
        for _ in range(3):
            f = _random_bandlimited(rng, 16, ctx.n)
            g = _random_bandlimited(rng, 16, ctx.n)
            worst = max(worst, averaging_residual(f, g, b))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("condexp_tower", "tower property on nested algebras", 1e-8)
def _chk_ce_tower(ctx, params):
    rng = ctx.rng("condexp_tower")
    b2 = BlaschkeProduct.monomial(2)
    b4 = BlaschkeProduct.monomial(4)
    worst = 0.0
    for _ in range(5):
        f = _random_bandlimited(rng, 32, ctx.n)
        lhs = condexp(f, b4)
        rhs = condexp(condexp(f, b2), b4)
        worst = max(worst, float(np.abs(lhs.samples - rhs.samples).max()))
    return [{"fixture": "monomial-nest", "residual": worst}]


@_register("pair_validation", "Definition 1.1", 1e-7)
def _chk_pair_validation(ctx, params):
    rows = []
    for fix in ctx.pair_fixtures():
        report = validate_pair(fix["base"], fix["generator"], fix["p"])
        for cond, resid in sorted(report.residuals.items()):
            rows.append(
                {
                    "fixture": f'{fix["id"]}:{cond}',
                    "residual": float(resid),
                    "tolerance": report.tolerances[cond],
                }
            )
    return rows


@_register("prop42_orthonormality", "Proposition 4.2(1)(2)", 1e-7)
def _chk_orthonormality(ctx, params):
    from .pairs import orthonormality_defect

    rows = []
    for fix in ctx.pair_fixtures():
        pair = ctx.valid_pair(fix)
        rows.append(
            {
                "fixture": fix["id"],
                "residual": orthonormality_defect(pair, int(params.get("max_order", 8))),
            }
        )
    return rows


@_register("prop42_isometry", "Proposition 4.2(3)", 1e-6)
def _chk_isometry(ctx, params):
    rng = ctx.rng("prop42_isometry")
    rows = []
    for fix in ctx.pair_fixtures():
        pair = ctx.valid_pair(fix)
        worst = 0.0
        for _ in range(int(params.get("trials", 20))):
            f = _random_poly(rng, 32, ctx.n)
            worst = max(
                worst,
                abs(pnorm(lift(pair, f), pair.p) - pnorm(f, pair.p)) / pnorm(f, pair.p),
            )
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("projection_idempotent", "Theorem 1.2", 1e-7)
def _chk_idempotent(ctx, params):
    rng = ctx.rng("projection_idempotent")
    rows = []
    for fix in ctx.pair_fixtures():
        op = Projection(ctx.valid_pair(fix))
        worst = 0.0
        for _ in range(int(params.get("trials", 10))):
            f = _random_poly(rng, 24, ctx.n)
            pf = op.apply_extended(f)
            p2f = op.apply_extended(pf)
            worst = max(
                worst,
                float(np.abs(p2f.samples - pf.samples).max()) / pnorm(f, fix["p"]),
            )
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("projection_contraction", "Theorem 1.2", 1e-7)
def _chk_p_contract(ctx, params):
    rng = ctx.rng("projection_contraction")
    rows = []
    for fix in ctx.pair_fixtures():
        op = Projection(ctx.valid_pair(fix))
        worst = 0.0
        for _ in range(int(params.get("trials", 10))):
            f = _random_poly(rng, 24, ctx.n)
            worst = max(
                worst, max(0.0, pnorm(op.apply_extended(f), fix["p"]) / pnorm(f, fix["p"]) - 1.0)
            )
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("projection_fixes_range", "Theorem 4.4", 1e-7)
def _chk_fixes_range(ctx, params):
    rng = ctx.rng("projection_fixes_range")
    rows = []
    for fix in ctx.pair_fixtures():
        pair = ctx.valid_pair(fix)
        op = Projection(pair)
        worst = 0.0
        for _ in range(int(params.get("trials", 8))):
            f = _random_poly(rng, 16, ctx.n)
            image = lift(pair, f)
            back = op.apply_extended(image)
            worst = max(
                worst,
                float(np.abs(back.samples - image.samples).max())
                / max(float(np.abs(image.samples).max()), 1e-300),
            )
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("projection_range_measurable", "Theorem 4.4", 1e-6)
def _chk_range_measurable(ctx, params):
    rng = ctx.rng("projection_range_measurable")
    rows = []
    for fix in ctx.pair_fixtures():
        pair = ctx.valid_pair(fix)
        op = Projection(pair)
        worst = 0.0
        for _ in range(int(params.get("trials", 5))):
            f = _random_poly(rng, 16, ctx.n)
            pf = op.apply_extended(f)
            phi = pair.generator.samples
            quotient = GridFunction(
                pf.samples * np.conj(phi) / np.maximum(np.abs(phi), 1e-12) ** 2
            )
            worst = max(worst, measurability_residual(quotient, pair.base))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("projection_analytic", "Theorem 1.2", 1e-7)
def _chk_p_analytic(ctx, params):
    rng = ctx.rng("projection_analytic")
    rows = []
    for fix in ctx.pair_fixtures():
        op = Projection(ctx.valid_pair(fix))
        worst = 0.0
        for _ in range(int(params.get("trials", 8))):
            f = _random_poly(rng, 24, ctx.n)
            worst = max(worst, negative_energy(op.apply_extended(f)))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("extension_restriction", "Corollary 1.3", 1e-9)
def _chk_restriction(ctx, params):
    rng = ctx.rng("extension_restriction")
    rows = []
    for fix in ctx.pair_fixtures():
        op = Projection(ctx.valid_pair(fix))
        worst = 0.0
        for _ in range(5):
            f = _random_poly(rng, 16, ctx.n)
            a = op.apply(f)
            b = op.apply_extended(f)
            worst = max(worst, float(np.abs(a.samples - b.samples).max()))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("extension_reality", "Corollary 4.8", 1e-9)
def _chk_reality(ctx, params):
    rng = ctx.rng("extension_reality")
    rows = []
    for fix in ctx.pair_fixtures():
        op = Projection(ctx.valid_pair(fix))
        worst = 0.0
        for _ in range(5):
            f = _random_bandlimited(rng, 16, ctx.n)
            lhs = op.apply_extended(f.conj())
            rhs = op.apply_extended(f).conj()
            worst = max(worst, float(np.abs(lhs.samples - rhs.samples).max()))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("extension_dual_path", "Corollary 1.3", 1e-9)
def _chk_ext_dual(ctx, params):
    rows = []
    kmax = int(params.get("max_frequency", 32))
    for fix in ctx.pair_fixtures():
        pair = ctx.valid_pair(fix)
        if not pair.base.is_monomial:
            continue
        op = Projection(pair)
        worst = 0.0
        for k in range(-kmax, kmax + 1):
            f = GridFunction.monomial(k, ctx.n)
            a = op.apply_extended(f, method="multiplier")
            b = op.apply_extended(f, method="fibers")
            worst = max(worst, float(np.abs(a.samples - b.samples).max()))
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("lemma21_certificate", "Lemma 2.1", 1e-8)
def _chk_lemma21(ctx, params):
    rows = []
    for fix in ctx.pair_fixtures():
        if abs(fix["p"] - 1.0) < 1e-12:
            continue
        op = Projection(ctx.valid_pair(fix))
        cert = certify_contractive(op, fix["p"], seed=ctx.seed)
        rows.append({"fixture": fix["id"], "residual": cert.residual})
    return rows


@_register("lemma22_certificate", "Lemma 2.2", 1e-8)
def _chk_lemma22(ctx, params):
    rows = []
    for fix in ctx.pair_fixtures():
        if abs(fix["p"] - 1.0) > 1e-12:
            continue
        op = Projection(ctx.valid_pair(fix))
        cert = certify_contractive(op, 1.0, seed=ctx.seed)
        rows.append({"fixture": fix["id"], "residual": cert.residual})
    return rows


@_register("certificate_falsification", "Lemma 2.1", 1e-3, mode="min")
def _chk_cert_falsify(ctx, params):
    def keep_low(f: GridFunction) -> GridFunction:
        from .circlefft import SpectralFunction

        s = analyze(f)
        c = s.coeffs.copy()
        c[(s.freqs() != 0) & (s.freqs() != 1)] = 0.0
        return synthesize(SpectralFunction(c))

    rng = ctx.rng("certificate_falsification")
    range_samples = [
        GridFunction.from_poly(rng.standard_normal(2) + 1j * rng.standard_normal(2), ctx.n)
        for _ in range(6)
    ]
    kernel_samples = [GridFunction.monomial(j, ctx.n) for j in range(2, 8)]
    cert = certify_contractive(keep_low, 3.0, range_samples, kernel_samples)
    return [{"fixture": "broken-multiplier", "residual": cert.residual}]


@_register("even_counterexample", "Theorem 3.1", 1e-8)
def _chk_even(ctx, params):
    cfg = ctx.inputs.get("counterexample", {"k": 2})
    k = int(cfg.get("k", 2))
    rep = counterexample_even(
        k,
        degree_cap=cfg.get("degree_cap"),
        n=min(ctx.n, 512),
        seed=ctx.seed,
    )
    rows = [
        {"fixture": f"k={k}:certificate", "residual": rep["certificate"].residual},
        {"fixture": f"k={k}:z-in-range", "residual": rep["witness"]["z_fixed_residual"]},
        {
            "fixture": f"k={k}:odd-opnorm",
            "residual": rep["odd_opnorm_lower_bound"],
            "tolerance": 1.0 + 1e-4,
            "mode": "min",
            "baseline": rep["odd_opnorm_lower_bound"],
        },
    ]
    return rows


@_register("aleksandrov_invariance", "Aleksandrov's theorem", 1e-7)
def _chk_alek_inv(ctx, params):
    rows = []
    for entry in ctx.inputs.get("aleksandrov", {}).get("vanishing", []):
        b = BlaschkeProduct.from_json_dict(entry["product"])
        rows.append(
            {
                "fixture": entry["id"],
                "residual": aleksandrov_check(b, int(params.get("max_power", 16)), ctx.n),
            }
        )
    return rows


@_register("aleksandrov_falsification", "Aleksandrov's theorem", 1e-3, mode="min")
def _chk_alek_falsify(ctx, params):
    rows = []
    for entry in ctx.inputs.get("aleksandrov", {}).get("nonvanishing", []):
        b = BlaschkeProduct.from_json_dict(entry["product"])
        value = aleksandrov_check(b, int(params.get("max_power", 16)), ctx.n)
        rows.append({"fixture": entry["id"], "residual": value, "baseline": value})
    return rows


@_register("finite_condexp_norm", "Theorem 3.1", 1e-9)
def _chk_finite_ce(ctx, params):
    rows = []
    for fix in ctx.space_fixtures():
        space = fix["space"]
        worst = 0.0
        for part in partitions_iter(space.n):
            e = condexp_matrix(space, part)
            for p in (1.0, 3.0):
                worst = max(
                    worst, abs(oracle_pnorm(e, p, space, seed=ctx.seed) - 1.0)
                )
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


@_register("finite_skew_excess", "Theorem 3.1", 1e-6, mode="min")
def _chk_finite_skew(ctx, params):
    rng = ctx.rng("finite_skew_excess")
    rows = []
    for fix in ctx.space_fixtures():
        space = fix["space"]
        excess = np.inf
        for t in range(int(params.get("trials", 10))):
            q = random_oblique_projection(space, rng)
            norm = oracle_pnorm(q, 3.0, space, seed=ctx.seed + t)
            excess = min(excess, norm - 1.0)
        rows.append({"fixture": fix["id"], "residual": float(excess),
                     "baseline": float(excess)})
    return rows


@_register("finite_p2_contrast", "orthogonal projections at p = 2", 1e-9)
def _chk_finite_p2(ctx, params):
    rows = []
    for fix in ctx.space_fixtures():
        space = fix["space"]
        v = np.arange(space.n, dtype=float)
        po = orthogonal_projection(space, [np.ones(space.n), v])
        n2 = oracle_pnorm(po, 2.0, space, seed=ctx.seed)
        n3 = oracle_pnorm(po, 3.0, space, seed=ctx.seed)
        rows.append({"fixture": f'{fix["id"]}:p2', "residual": abs(n2 - 1.0)})
        rows.append(
            {
                "fixture": f'{fix["id"]}:odd',
                "residual": n3 - 1.0,
                "tolerance": 1e-6,
                "mode": "min",
                "baseline": n3 - 1.0,
            }
        )
    return rows


@_register("lemma32_enumeration", "Lemma 3.2", 1e-9)
def _chk_lemma32(ctx, params):
    rng = ctx.rng("lemma32_enumeration")
    rows = []
    for fix in ctx.space_fixtures():
        space = fix["space"]
        worst = 0.0
        for t in range(int(params.get("fixtures", 5))):
            g = rng.integers(0, 3, space.n).astype(float)
            part = sigma_from_functions([g])
            f = rng.standard_normal(space.n)
            for block in part.blocks:
                idx = list(block)
                f[idx] -= (space.mu[idx] * f[idx]).sum() / space.mu[idx].sum()
            rep = lemma32_check(space, f, [g], trials=8, seed=ctx.seed + t)
            if rep["hypothesis_ok"]:
                worst = max(worst, rep["conclusion_residual"])
        rows.append({"fixture": fix["id"], "residual": worst})
    return rows


# --------------------------------------------------------------------------
# scenario execution


def list_checks(stream=None) -> int:
    stream = stream or sys.stdout
    for name in sorted(CHECKS):
        d = CHECKS[name]
        op = "<=" if d.mode == "max" else ">="
        stream.write(f"{name:32s} ref={d.ref!r} residual {op} {d.tolerance:g}\n")
    stream.write(f"{len(CHECKS)} checks registered\n")
    return 0


def _load_scenario(path: str) -> dict:
    bundled = resources.files("hardyproj") / "scenarios" / f"{path}.json"
    try:
        if bundled.is_file():
            text = bundled.read_text(encoding="utf-8")
        else:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
    except OSError as err:
        raise ConfigurationError(f"cannot read scenario: {err}")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"scenario is not valid JSON: {err}")
    return data


def _validate_scenario(data: dict):
    if not isinstance(data, dict):
        raise ConfigurationError("scenario must be a JSON object")
    for key in ("name", "checks"):
        if key not in data:
            raise ConfigurationError(f"scenario missing required field {key!r}")
    if not isinstance(data["checks"], list) or not data["checks"]:
        raise ConfigurationError("scenario field 'checks' must be a nonempty list")
    for entry in data["checks"]:
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigurationError("each check needs at least a 'name'")
        if entry["name"] not in CHECKS:
            raise ConfigurationError(f'unknown check {entry["name"]!r}')
        tol = entry.get("tolerance")
        if tol is not None and not (isinstance(tol, (int, float)) and tol > 0):
            raise ConfigurationError(f'check {entry["name"]!r}: tolerance must be positive')
    randomized = any(True for _ in data["checks"])
    if randomized and "seed" not in data:
        raise ConfigurationError("scenario missing 'seed'")


def _run_one_check(ctx: RunContext, entry: dict, tol_scale: float):
    definition = CHECKS[entry["name"]]
    params = {k: v for k, v in entry.items() if k not in ("name", "tolerance")}
    base_tol = float(entry.get("tolerance", definition.tolerance))
    rows_out = []
    try:
        rows = definition.runner(ctx, params)
    except _REJECTABLE as err:
        return [
            {
                "name": definition.name,
                "fixture": "-",
                "ref": definition.ref,
                "residual": None,
                "tolerance": base_tol * tol_scale,
                "verdict": "rejected-input",
                "detail": str(err),
            }
        ]
    for row in rows:
        tol = float(row.get("tolerance", base_tol)) * tol_scale
        mode = row.get("mode", definition.mode)
        residual = float(row["residual"])
        if mode == "max":
            ok = residual <= tol
        else:
            ok = residual >= tol
        out = {
            "name": definition.name,
            "fixture": str(row["fixture"]),
            "ref": definition.ref,
            "residual": residual,
            "tolerance": tol,
            "verdict": "pass" if ok else "fail",
        }
        if "baseline" in row:
            out["baseline"] = float(row["baseline"])
        rows_out.append(out)
    return rows_out


def run_scenario(
    data: dict,
    grid_size: int = None,
    seed: int = None,
    tol_scale: float = 1.0,
    parallel: bool = False,
) -> dict:
    _validate_scenario(data)
    n = check_grid_size(grid_size or data.get("grid_size", DEFAULT_GRID))
    master_seed = int(seed if seed is not None else data.get("seed", 0))
    ctx = RunContext(
        name=str(data["name"]),
        n=n,
        seed=master_seed,
        tol_scale=float(tol_scale),
        inputs=data.get("inputs", {}),
    )
    entries = data["checks"]
    if parallel:
        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(
                pool.map(lambda e: _run_one_check(ctx, e, float(tol_scale)), entries)
            )
    else:
        results = [_run_one_check(ctx, e, float(tol_scale)) for e in entries]
    rows = [row for chunk in results for row in chunk]
    rows.sort(key=lambda r: (r["name"], r["fixture"]))
    counts = {
        "pass": sum(r["verdict"] == "pass" for r in rows),
        "fail": sum(r["verdict"] == "fail" for r in rows),
        "rejected": sum(r["verdict"] == "rejected-input" for r in rows),
    }
    verdict = "pass" if counts["fail"] == 0 and counts["rejected"] == 0 else "fail"
    return {
        "tool": {"name": "hardyproj", "version": __version__},
        "scenario": ctx.name,
        "grid_size": n,
        "seed": master_seed,
        "tol_scale": float(tol_scale),
        "checks": rows,
        "counts": counts,
        "verdict": verdict,
    }


def _write_report(report: dict, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(report: dict, path: str):
    lines = ["name,fixture,ref,residual,tolerance,verdict"]
    for row in report["checks"]:
        residual = "" if row["residual"] is None else "%.17e" % row["residual"]
        lines.append(
            ",".join(
                [
                    row["name"],
                    row["fixture"],
                    '"%s"' % row["ref"],
                    residual,
                    "%.17e" % row["tolerance"],
                    row["verdict"],
                ]
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# entry points


def _cmd_run(args) -> int:
    try:
        data = _load_scenario(args.scenario)
        report = run_scenario(
            data,
            grid_size=args.grid_size,
            seed=args.seed,
            tol_scale=args.tol_scale,
            parallel=args.parallel,
        )
    except ConfigurationError as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return 2
    if args.report:
        _write_report(report, args.report)
    if args.csv:
        _write_csv(report, args.csv)
    for row in report["checks"]:
        res = "-" if row["residual"] is None else f'{row["residual"]:.3e}'
        print(f'{row["verdict"]:>14s}  {row["name"]:32s} {row["fixture"]:28s} {res}')
    print(
        f'{report["verdict"].upper()}: {report["counts"]["pass"]} passed, '
        f'{report["counts"]["fail"]} failed, {report["counts"]["rejected"]} rejected'
    )
    return 0 if report["verdict"] == "pass" else 1


def _cmd_validate_pair(args) -> int:
    try:
        base = BlaschkeProduct.from_json_dict(json.loads(args.base))
        generator = generator_from_spec(json.loads(args.generator), args.grid_size)
        report = validate_pair(base, generator, args.p)
    except (ConfigurationError, ToolkitError, json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    print(json.dumps(report.to_json_dict(), sort_keys=True, indent=2))
    return 0 if report.verdict else 1


def _cmd_counterexample(args) -> int:
    rep = counterexample_even(args.k, degree_cap=args.degree_cap, seed=args.seed)
    out = {
        "p": rep["p"],
        "degree_cap": rep["degree_cap"],
        "certificate": rep["certificate"].to_json_dict(),
        "odd_exponent": rep["odd_exponent"],
        "odd_opnorm_lower_bound": rep["odd_opnorm_lower_bound"],
        "witness": rep["witness"],
    }
    if args.report:
        _write_report(out, args.report)
    print(json.dumps(out, sort_keys=True, indent=2))
    ok = rep["certificate"].verdict and rep["odd_opnorm_lower_bound"] > 1.0 + 1e-4
    return 0 if ok else 1


def _cmd_finite_lab(args) -> int:
    weights = tuple(float(x) for x in args.weights.split(","))
    try:
        space = FiniteSpace(weights)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if args.experiment == "theorem31":
        rep = theorem31_probe(space, args.p, trials=args.trials, seed=args.seed)
        ok = (
            rep["ce_max_defect"] <= 1e-9
            and rep["all_exceed_one"]
            and abs(rep["p2_contrast"]["norm_at_2"] - 1.0) <= 1e-9
            and rep["p2_contrast"]["norm_at_p"] > 1.0
        )
    elif args.experiment == "lemma32":
        rng = np.random.default_rng(args.seed)
        g = rng.integers(0, 3, space.n).astype(float)
        part = sigma_from_functions([g])
        f = rng.standard_normal(space.n)
        for block in part.blocks:
            idx = list(block)
            f[idx] -= (space.mu[idx] * f[idx]).sum() / space.mu[idx].sum()
        rep = lemma32_check(space, f, [g], trials=args.trials, seed=args.seed)
        ok = not rep["counterexample"]
    else:
        rng = np.random.default_rng(args.seed)
        q = random_oblique_projection(space, rng)
        value = oracle_pnorm(q, args.p, space, seed=args.seed)
        rep = {"experiment": "oracle", "p": args.p, "opnorm_lower_bound": value}
        ok = True
    if args.report:
        _write_report(rep, args.report)
    print(json.dumps(rep, sort_keys=True, indent=2, default=str))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hardyproj",
        description="Scenario runner for the Hardy-space projection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file or bundled scenario name")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--grid-size", type=int, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--report", default=None)
    p_run.add_argument("--csv", default=None)
    p_run.add_argument("--tol-scale", type=float, default=1.0)
    p_run.add_argument("--parallel", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list-checks", help="print the check catalog")
    p_list.set_defaults(func=lambda args: list_checks())

    p_vp = sub.add_parser("validate-pair", help="validate a single pair")
    p_vp.add_argument("--base", required=True, help="Blaschke product JSON")
    p_vp.add_argument("--generator", required=True, help="generator spec JSON")
    p_vp.add_argument("--p", type=float, required=True)
    p_vp.add_argument("--grid-size", type=int, default=DEFAULT_GRID)
    p_vp.set_defaults(func=_cmd_validate_pair)

    p_cex = sub.add_parser("counterexample", help="even-exponent counterexample report")
    p_cex.add_argument("--k", type=int, default=2)
    p_cex.add_argument("--degree-cap", type=int, default=None)
    p_cex.add_argument("--seed", type=int, default=0)
    p_cex.add_argument("--report", default=None)
    p_cex.set_defaults(func=_cmd_counterexample)

    p_fin = sub.add_parser("finite-lab", help="finite probability space experiments")
    p_fin.add_argument("--weights", required=True, help="comma-separated atom weights")
    p_fin.add_argument(
        "--experiment", choices=("theorem31", "lemma32", "oracle"), default="theorem31"
    )
    p_fin.add_argument("--p", type=float, default=3.0)
    p_fin.add_argument("--trials", type=int, default=20)
    p_fin.add_argument("--seed", type=int, default=0)
    p_fin.add_argument("--report", default=None)
    p_fin.set_defaults(func=_cmd_finite_lab)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
