"""Reference computations that share no code with the package."""

from __future__ import annotations

import itertools
import math

import numpy as np


def monomials(n: int, k: int) -> list[tuple[int, ...]]:
    if k < 0:
        return []
    return [
        tuple(c.count(i) for i in range(n))
        for c in itertools.combinations_with_replacement(range(n), k)
    ]


def harmonic_poly_count(n: int, k: int) -> int:
    """Nullity of the Laplacian from degree-k to degree-(k-2) polynomials on R^n."""
    src = monomials(n, k)
    if k < 2:
        return len(src)
    dst = {a: i for i, a in enumerate(monomials(n, k - 2))}
    L = np.zeros((len(dst), len(src)))
    for j, a in enumerate(src):
        for i in range(n):
            if a[i] >= 2:
                b = list(a)
                b[i] -= 2
                L[dst[tuple(b)], j] += a[i] * (a[i] - 1)
    return len(src) - int(np.linalg.matrix_rank(L))


def sphere_levels(d: int, cutoff: float) -> dict[float, int]:
    """Eigenvalue k(k+d-1) of S^d with multiplicity from harmonic polynomials on R^(d+1)."""
    out = {}
    k = 0
    while k * (k + d - 1) <= cutoff:
        out[float(k * (k + d - 1))] = harmonic_poly_count(d + 1, k)
        k += 1
    return out


def _group(values, rtol=1e-9):
    out = []
    for v in sorted(values):
        if out and math.isclose(v, out[-1][0], rel_tol=rtol, abs_tol=rtol):
            out[-1][1] += 1
        else:
            out.append([v, 1])
    return [(v, k) for v, k in out]


def torus_levels(basis, cutoff: float) -> list[tuple[float, int]]:
    """Exhaustive dual-lattice enumeration with per-coordinate bounds from the inverse Gram matrix."""
    B = np.asarray(basis, dtype=float)
    n = B.shape[0]
    D = np.linalg.solve(B, np.eye(n)).T  # rows d_j with b_i . d_j = delta_ij
    G = D @ D.T
    R2 = cutoff / (4 * math.pi**2)
    Ginv = np.linalg.inv(G)
    bounds = [int(math.floor(math.sqrt(R2 * Ginv[i, i]))) + 1 for i in range(n)]
    vals = []
    for k in itertools.product(*[range(-b, b + 1) for b in bounds]):
        xi = np.asarray(k, dtype=float) @ D
        v = 4 * math.pi**2 * float(xi @ xi)
        if v <= cutoff * (1 + 1e-12):
            vals.append(0.0 if abs(v) < 1e-12 else v)
    return _group(vals)


def plus_root(e: float, m: int) -> float:
    return ((2 - m) + math.sqrt((m - 2) ** 2 + 4 * e)) / 2


def count_weights_below(entries, m: int, lo: float, hi: float) -> int:
    """Multiplicity of positive-branch weights in the open interval (lo, hi)."""
    return sum(k for e, k in entries if lo < plus_root(e, m) < hi)


def stable_pattern(m: int, sym_dim: int) -> dict[float, int]:
    out = {0.0: 1, float(m - 1): 2 * m}
    if m * m - 1 - sym_dim > 0:
        out[float(2 * m)] = m * m - 1 - sym_dim
    return out
