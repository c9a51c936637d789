"""Finite probability spaces: conditional-expectation matrices, algebras
generated by function families, a brute-force weighted p-norm oracle,
and probes for the extension theorems at desk scale.

Spaces are capped at 12 atoms so that exhaustive partition enumeration
and the ascent oracle stay fast; the statements being exercised are
dimension-free, so small spaces suffice for both confirmation and
falsification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._ascent import ratio_ascent
from .errors import ConfigurationError

MAX_ATOMS = 12
EQUALITY_TOL = 1e-9


@dataclass(frozen=True)
class FiniteSpace:
    """Atom weights: positive, at least 1e-9 each, summing to one."""

    weights: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if not 1 <= len(w) <= MAX_ATOMS:
            raise ConfigurationError(f"need 1..{MAX_ATOMS} atoms, got {len(w)}")
        if min(w) < 1e-9:
            raise ConfigurationError("atom weights must be >= 1e-9")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ConfigurationError("atom weights must sum to 1")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def mu(self) -> np.ndarray:
        return np.array(self.weights)

    @classmethod
    def uniform(cls, n: int) -> "FiniteSpace":
        return cls((1.0 / n,) * n)

    @classmethod
    def random(cls, rng, n: int) -> "FiniteSpace":
        raw = rng.random(n) + 0.1
        raw /= raw.sum()
        # exact sum to one after rounding noise
        raw[-1] = 1.0 - raw[:-1].sum()
        return cls(tuple(raw))


@dataclass(frozen=True)
class FinitePartition:
    """Disjoint index blocks covering {0..n-1}, canonically ordered."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        blocks = tuple(sorted(blocks, key=lambda b: b[0]))
        seen = set()
        for b in blocks:
            if not b:
                raise ConfigurationError("empty block")
            for i in b:
                if i in seen:
                    raise ConfigurationError(f"index {i} appears twice")
                seen.add(i)
        if seen != set(range(len(seen))):
            raise ConfigurationError("blocks must cover 0..n-1 exactly")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @classmethod
    def trivial(cls, n: int) -> "FinitePartition":
        return cls((tuple(range(n)),))

    @classmethod
    def discrete(cls, n: int) -> "FinitePartition":
        return cls(tuple((i,) for i in range(n)))


def condexp_matrix(space: FiniteSpace, partition: FinitePartition) -> np.ndarray:
    """(E f)_i = sum over the block of i of mu_j f_j / block mass."""
    if partition.n != space.n:
        raise ConfigurationError("partition size does not match the space")
    mu = space.mu
    out = np.zeros((space.n, space.n))
    for block in partition.blocks:
        idx = list(block)
        mass = mu[idx].sum()
        for i in idx:
            out[i, idx] = mu[idx] / mass
    return out


def oracle_pnorm(
    matrix: np.ndarray,
    p,
    space: FiniteSpace,
    restarts: int = 24,
    steps: int = 200,
    seed: int = 0,
) -> float:
    """Lower-bound estimate of the weighted p-norm of a matrix by seeded
    multi-restart coordinate ascent; exact 1 for conditional expectations
    (the constant start attains the norm, contraction caps it)."""
    matrix = np.asarray(matrix)
    n = space.n
    if matrix.shape != (n, n):
        raise ConfigurationError("matrix shape does not match the space")
    ones = np.ones(n, dtype=np.complex128)
    ramp = np.arange(1, n + 1).astype(np.complex128)
    return ratio_ascent(
        matrix,
        np.eye(n),
        space.mu,
        float(p),
        restarts=restarts,
        steps=steps,
        seed=seed,
        extra_starts=(ones, ramp),
    )


def sigma_from_functions(vectors, tol: float = EQUALITY_TOL) -> FinitePartition:
    """Partition into classes of indices on which every vector is constant
    (equality within tol, closed transitively)."""
    vecs = [np.asarray(v, dtype=np.complex128) for v in vectors]
    if not vecs:
        raise ConfigurationError("need at least one vector")
    n = vecs[0].shape[0]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if all(abs(v[i] - v[j]) <= tol for v in vecs):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return FinitePartition(tuple(tuple(g) for g in groups.values()))


def partitions_iter(n: int):
    """All set partitions of {0..n-1} via restricted growth strings."""
    codes = [0] * n
    maxes = [0] * n

    def emit():
        blocks = {}
        for i, c in enumerate(codes):
            blocks.setdefault(c, []).append(i)
        return FinitePartition(tuple(tuple(b) for b in blocks.values()))

    yield emit()
    while True:
        i = n - 1
        while i > 0 and codes[i] > maxes[i - 1]:
            i -= 1
        if i == 0:
            return
        codes[i] += 1
        maxes[i] = max(maxes[i - 1], codes[i])
        for j in range(i + 1, n):
            codes[j] = 0
            maxes[j] = maxes[i]
        yield emit()


def block_means(space: FiniteSpace, f: np.ndarray, partition: FinitePartition) -> np.ndarray:
    mu = space.mu
    return np.array(
        [np.sum(mu[list(b)] * f[list(b)]) / mu[list(b)].sum() for b in partition.blocks]
    )


def lemma32_check(
    space: FiniteSpace,
    f,
    family,
    trials: int = 32,
    seed: int = 0,
    tol: float = 1e-9,
) -> dict:
    """Local-to-joint conditioning check.

    Hypothesis: the conditional expectation of f vanishes for the algebra
    of every single function in the real span of `family` (tested on the
    basis, on random real combinations, and for spaces with at most 6
    atoms on every achievable level-set partition).  Conclusion: the
    conditional expectation of f for the joint algebra of the family
    vanishes.  The report flags a counterexample only when the hypothesis
    holds and the conclusion fails.
    """
    f = np.asarray(f, dtype=np.complex128)
    vecs = [np.asarray(v, dtype=np.complex128) for v in family]
    if not vecs:
        raise ConfigurationError("family must be nonempty")
    n = space.n
    rng = np.random.default_rng(seed)

    def hypothesis_on(g):
        part = sigma_from_functions([g])
        return float(np.abs(block_means(space, f, part)).max())

    tested = []
    worst_hypothesis = 0.0
    for v in vecs:
        r = hypothesis_on(v)
        tested.append(r)
        worst_hypothesis = max(worst_hypothesis, r)
    for _ in range(int(trials)):
        coeffs = rng.standard_normal(len(vecs))
        g = sum(c * v for c, v in zip(coeffs, vecs))
        r = hypothesis_on(g)
        tested.append(r)
        worst_hypothesis = max(worst_hypothesis, r)
    exhaustive = None
    if n <= 6:
        exhaustive = _exhaustive_hypothesis(space, f, vecs, rng, tol)
        worst_hypothesis = max(worst_hypothesis, exhaustive["worst_residual"])
    joint = sigma_from_functions(vecs)
    conclusion = float(np.abs(block_means(space, f, joint)).max())
    hypothesis_ok = worst_hypothesis <= tol
    conclusion_ok = conclusion <= tol
    return {
        "hypothesis_residual": worst_hypothesis,
        "conclusion_residual": conclusion,
        "hypothesis_ok": hypothesis_ok,
        "conclusion_ok": conclusion_ok,
        "joint_blocks": [list(b) for b in joint.blocks],
        "exhaustive": exhaustive,
        "counterexample": bool(hypothesis_ok and not conclusion_ok),
    }


def _exhaustive_hypothesis(space, f, vecs, rng, tol):
    """Enumerate every partition achievable as the level sets of some real
    combination of the family and evaluate the hypothesis on each."""
    n = space.n
    d = len(vecs)
    stacked = np.stack(vecs)  # (d, n)
    # the zero combination generates the trivial algebra, so the global
    # mean condition is always part of the hypothesis
    worst = float(np.abs(block_means(space, f, FinitePartition.trivial(n))).max())
    achievable = 1
    for partition in partitions_iter(n):
        if len(partition.blocks) == 1:
            continue
        # constraints: g constant on each block
        rows = []
        for block in partition.blocks:
            base = block[0]
            for other in block[1:]:
                diff = stacked[:, base] - stacked[:, other]
                rows.append(diff.real)
                rows.append(diff.imag)
        if rows:
            c = np.stack(rows)
            _, s, vt = np.linalg.svd(c, full_matrices=True)
            rank = int((s > 1e-10 * max(1.0, s[0] if s.size else 1.0)).sum())
            null = vt[rank:].T  # (d, d - rank)
        else:
            null = np.eye(d)
        if null.shape[1] == 0:
            continue
        found = None
        for _ in range(8):
            alpha = null @ rng.standard_normal(null.shape[1])
            g = alpha @ stacked
            if sigma_from_functions([g]).blocks == partition.blocks:
                found = g
                break
        if found is None:
            continue
        achievable += 1
        worst = max(worst, float(np.abs(block_means(space, f, partition)).max()))
    return {"achievable_partitions": achievable, "worst_residual": worst}


def random_oblique_projection(space: FiniteSpace, rng, rank: int = 2,
                              max_condition: float = 1e8) -> np.ndarray:
    """Random projection fixing the constants whose range is generically not
    the span of block indicators; resamples degenerate draws."""
    n = space.n
    if not 2 <= rank <= n - 1:
        raise ConfigurationError("rank must lie in 2..n-1")
    ones = np.ones(n)
    for _ in range(200):
        r = np.column_stack([ones, rng.standard_normal((n, rank - 1))])
        a = np.column_stack([ones, rng.standard_normal((n, rank - 1))])
        gram = a.T @ r
        if np.linalg.cond(gram) > max_condition:
            continue
        q = r @ np.linalg.solve(gram, a.T)
        part = sigma_from_functions(list(r.T))
        if len(part.blocks) == rank:
            e = condexp_matrix(space, part)
            if np.abs(q - e).max() < 1e-8:
                continue  # accidentally a conditional expectation
        return q
    raise ConfigurationError("could not draw a well-conditioned projection")


def orthogonal_projection(space: FiniteSpace, vectors) -> np.ndarray:
    """Orthogonal projection in the mu-weighted inner product onto the span."""
    g = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    w = np.diag(space.mu)
    return g @ np.linalg.solve(g.T @ w @ g, g.T @ w)


def theorem31_probe(
    space: FiniteSpace,
    p,
    trials: int = 50,
    seed: int = 0,
    restarts: int = 16,
    steps: int = 160,
) -> dict:
    """Contrast conditional expectations (norm one) against random
    projections fixing the constants (norm strictly above one) at an
    exponent away from the even integers, plus the p = 2 contrast where
    an orthogonal non-averaging projection also has norm one.
    """
    p = float(p)
    if p < 1:
        raise ConfigurationError("p must be >= 1")
    if abs(p / 2 - round(p / 2)) < 1e-12:
        raise ConfigurationError("probe requires an exponent away from 2N")
    rng = np.random.default_rng(seed)
    n = space.n
    ce_defect = 0.0
    if n <= 6:
        parts = list(partitions_iter(n))
    else:
        parts = [sigma_from_functions([rng.integers(0, 3, n).astype(float)])
                 for _ in range(20)]
    for part in parts:
        e = condexp_matrix(space, part)
        norm = oracle_pnorm(e, p, space, restarts=restarts, steps=steps, seed=seed)
        ce_defect = max(ce_defect, abs(norm - 1.0))
    excesses = []
    for t in range(int(trials)):
        q = random_oblique_projection(space, rng, rank=2)
        norm = oracle_pnorm(q, p, space, restarts=restarts, steps=steps,
                            seed=seed + 1000 + t)
        excesses.append(norm - 1.0)
    v = np.arange(n, dtype=float)
    po = orthogonal_projection(space, [np.ones(n), v])
    p2_norm = oracle_pnorm(po, 2.0, space, restarts=restarts, steps=steps, seed=seed + 7)
    podd_norm = oracle_pnorm(po, p, space, restarts=restarts, steps=steps, seed=seed + 8)
    return {
        "p": p,
        "ce_partitions": len(parts),
        "ce_max_defect": float(ce_defect),
        "projection_trials": int(trials),
        "min_excess": float(min(excesses)) if excesses else None,
        "all_exceed_one": bool(all(e > 0 for e in excesses)),
        "p2_contrast": {
            "norm_at_2": float(p2_norm),
            "norm_at_p": float(podd_norm),
        },
    }
