"""Shared lower-bound oracle for weighted p-norm operator ratios.

Maximizes ||A x||_{p,w} / ||B x||_{p,w} over complex coefficient vectors
by multi-restart per-coordinate ascent.  The result is deterministic
given the seed and is always a valid lower bound for the discrete ratio
supremum, since it is a maximum of evaluated ratios.
"""

from __future__ import annotations

import numpy as np


def ratio_ascent(
    num_mat: np.ndarray,
    den_mat: np.ndarray,
    weights: np.ndarray,
    p: float,
    restarts: int = 24,
    steps: int = 200,
    seed: int = 0,
    extra_starts=(),
) -> float:
    num_mat = np.asarray(num_mat, dtype=np.complex128)
    den_mat = np.asarray(den_mat, dtype=np.complex128)
    weights = np.asarray(weights, dtype=float)
    dim = num_mat.shape[1]
    restarts = max(int(restarts), 1)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((dim, restarts)) + 1j * rng.standard_normal((dim, restarts))
    col = 0
    for start in extra_starts:
        if col >= restarts:
            break
        start = np.asarray(start, dtype=np.complex128)
        if start.shape == (dim,) and np.abs(start).max() > 0:
            x[:, col] = start
            col += 1
    numx = num_mat @ x
    denx = den_mat @ x
    wcol = weights[:, None]

    def norms(v):
        return (wcol * np.abs(v) ** p).sum(axis=0) ** (1.0 / p)

    best = norms(numx) / np.maximum(norms(denx), 1e-300)
    step_sizes = (0.7, 0.25, 0.08, 0.02, 0.005)
    directions = (1.0, -1.0, 1j, -1j)
    for step in range(int(steps)):
        i = step % dim
        scale = np.maximum(np.abs(x[i]), 0.1 * np.abs(x).max(axis=0) + 1e-12)
        for h in step_sizes:
            for d in directions:
                delta = h * d * scale
                cand_num = numx + num_mat[:, [i]] * delta[None, :]
                cand_den = denx + den_mat[:, [i]] * delta[None, :]
                r = norms(cand_num) / np.maximum(norms(cand_den), 1e-300)
                improved = r > best * (1.0 + 1e-14)
                if improved.any():
                    x[i, improved] += delta[improved]
                    numx[:, improved] = cand_num[:, improved]
                    denx[:, improved] = cand_den[:, improved]
                    best = np.where(improved, r, best)
    return float(best.max())
