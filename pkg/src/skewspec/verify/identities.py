"""Brute-force checks of the algebraic identities behind the Pfaffian formulas.

The generalised de Bruijn formula is checked on discrete measures: the pair
integral over d^2u d^2v F(u, v) is replaced by a finite sum over points w_i
with antisymmetric weights F_ij.  Both sides are multilinear in the measure,
so exact agreement for arbitrary finite antisymmetric F (a dense family of
test measures) is the algebraic content of the identity; each side is then
evaluated exactly by enumerating all index tuples.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..skewlinalg import det_full_pivot, modified_vandermonde, pfaffian, vandermonde

__all__ = [
    "debruijn_sides",
    "check_debruijn",
    "check_vandermonde_suite",
    "check_pfaffian_suite",
    "berezinian_one",
    "berezinian_two",
]


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def debruijn_sides(F, fvals, gvals, alpha):
    """Both sides of the generalised de Bruijn identity on a discrete measure.

    Parameters
    ----------
    F : (P, P) antisymmetric array
        Pair weights F(w_i, w_j).
    fvals, gvals : (2n + m, P) arrays
        f_a(w_i) and g_a(w_i).
    alpha : (2n + m, m) array
        Constant border columns.

    Returns
    -------
    lhs, rhs : complex
        lhs = sum over (i_1..i_2n) of prod_j F(i_{2j-1}, i_{2j}) det[f(i_1), g(i_2), ..., f(i_{2n-1}), g(i_{2n}) | alpha]
        rhs = (-1)^{m(m-1)/2} n! Pf[[A, alpha], [-alpha^T, 0]],
        A_ab = sum_ij F_ij (f_a(i) g_b(j) - f_b(i) g_a(j)).
    """
    F = np.asarray(F, dtype=complex)
    fvals = np.asarray(fvals, dtype=complex)
    gvals = np.asarray(gvals, dtype=complex)
    size, P = fvals.shape
    alpha = np.asarray(alpha, dtype=complex)
    alpha = alpha.reshape(size, -1) if alpha.size else np.zeros((size, 0), dtype=complex)
    m = alpha.shape[1]
    n2 = size - m
    if n2 < 0 or n2 % 2:
        raise ValueError("need 2n + m functions for m border columns")
    n = n2 // 2
    lhs = 0j
    for idx in itertools.product(range(P), repeat=2 * n):
        w = 1.0 + 0j
        for j in range(n):
            w *= F[idx[2 * j], idx[2 * j + 1]]
        if w == 0:
            continue
        cols = []
        for j in range(n):
            cols.append(fvals[:, idx[2 * j]])
            cols.append(gvals[:, idx[2 * j + 1]])
        M = np.column_stack(cols + [alpha[:, i] for i in range(m)]) if size else np.zeros((0, 0))
        lhs += w * (np.linalg.det(M) if size else 1.0)
    A = fvals @ F @ gvals.T
    A = A - A.T
    B = np.zeros((size + m, size + m), dtype=complex)
    B[:size, :size] = A
    B[:size, size:] = alpha
    B[size:, :size] = -alpha.T
    rhs = (-1) ** (m * (m - 1) // 2) * math.factorial(n) * (pfaffian(B) if B.size else 1.0)
    return complex(lhs), complex(rhs)


def check_debruijn(n: int, m: int = 0, points: int = 5, degree: int = 4, seed: int = 0,
                   alpha: str = "random", tol: float = 1e-12) -> dict:
    """Generalised de Bruijn identity on a random discrete antisymmetric measure.

    ``alpha="unit"`` uses the border [0_{m, 2n} | 1_m]^T, which isolates the
    overall sign (-1)^{m(m-1)/2}.  Trial functions are random complex
    polynomials of degree ``degree``.
    """
    rng = np.random.default_rng(seed)
    P = points
    w = rng.normal(size=P) + 1j * rng.normal(size=P)
    F = rng.normal(size=(P, P)) + 1j * rng.normal(size=(P, P))
    F = F - F.T
    size = 2 * n + m
    cf = rng.normal(size=(size, degree + 1)) + 1j * rng.normal(size=(size, degree + 1))
    cg = rng.normal(size=(size, degree + 1)) + 1j * rng.normal(size=(size, degree + 1))
    powers = w[None, :] ** np.arange(degree + 1)[:, None]
    fvals = cf @ powers
    gvals = cg @ powers
    if alpha == "unit":
        al = np.zeros((size, m))
        al[2 * n:, :] = np.eye(m)
    else:
        al = rng.normal(size=(size, m)) + 1j * rng.normal(size=(size, m))
    lhs, rhs = debruijn_sides(F, fvals, gvals, al)
    rel = _rel(lhs, rhs)
    return {"check": "debruijn", "params": {"n": n, "m": m, "points": P, "alpha": alpha, "seed": seed},
            "lhs": lhs, "rhs": rhs, "rel_err": float(rel), "tol": tol, "pass": bool(rel <= tol)}


def berezinian_one(z, kappa):
    """det[z_a^{b-1} (b < len(z)) | 1/(kappa - z_a)] and Delta(z) / prod(kappa - z)."""
    z = np.asarray(z, dtype=complex)
    K = z.size
    M = np.column_stack([z ** b for b in range(K - 1)] + [1.0 / (kappa - z)])
    return det_full_pivot(M), vandermonde(z) / np.prod(kappa - z)


def berezinian_two(z, kappa):
    """det[z^0 .. z^{K-3} | z^{K-1} | 1/(kappa - z)] and (sum z - kappa) Delta(z) / prod(kappa - z).

    K = len(z); the skipped power z^{K-2} is what produces the sum-of-roots factor.
    """
    z = np.asarray(z, dtype=complex)
    K = z.size
    M = np.column_stack([z ** b for b in range(K - 2)] + [z ** (K - 1), 1.0 / (kappa - z)])
    return det_full_pivot(M), (z.sum() - kappa) * vandermonde(z) / np.prod(kappa - z)


def check_vandermonde_suite(max_n: int = 8, seed: int = 0, trials: int = 20, tol: float = 1e-9) -> dict:
    """Modified Vandermonde and the two Cauchy-type (Berezinian) determinant identities
    at random complex points.  kappa is placed at more than twice the largest |z|."""
    rng = np.random.default_rng(seed)
    worst = {"modified_vandermonde": 0.0, "berezinian_one": 0.0, "berezinian_two": 0.0}
    for _ in range(trials):
        for N in range(1, max_n + 1):
            z = rng.normal(size=N) + 1j * rng.normal(size=N)
            lhs = modified_vandermonde(z)
            rhs = z.sum() * vandermonde(z)
            worst["modified_vandermonde"] = max(worst["modified_vandermonde"], _rel(lhs, rhs))
        for n in range(1, 4):
            z = rng.normal(size=2 * n) + 1j * rng.normal(size=2 * n)
            kappa = 2.5 * np.abs(z).max() * np.exp(2j * np.pi * rng.random())
            worst["berezinian_one"] = max(worst["berezinian_one"], _rel(*berezinian_one(z, kappa)))
        for n in range(0, 3):
            z = rng.normal(size=2 * n + 2) + 1j * rng.normal(size=2 * n + 2)
            kappa = 2.5 * np.abs(z).max() * np.exp(2j * np.pi * rng.random())
            worst["berezinian_two"] = max(worst["berezinian_two"], _rel(*berezinian_two(z, kappa)))
    return {"check": "vandermonde_suite", "params": {"max_n": max_n, "trials": trials, "seed": seed},
            "rel_err": {k: float(v) for k, v in worst.items()}, "tol": tol,
            "pass": bool(max(worst.values()) <= tol)}


def check_pfaffian_suite(count: int = 200, seed: int = 0, tol: float = 1e-9) -> dict:
    """Pf(A)^2 = det(A) and Pf(B A B^T) = det(B) Pf(A) for random skew matrices of dims 2..10."""
    rng = np.random.default_rng(seed)
    sq = cong = 0.0
    for i in range(count):
        d = 2 * (1 + i % 5)
        X = rng.normal(size=(d, d)) + (1j * rng.normal(size=(d, d)) if i % 2 else 0)
        A = X - X.T
        p = pfaffian(A)
        sq = max(sq, _rel(p * p, np.linalg.det(A)))
        if d <= 8:
            B = rng.normal(size=(d, d))
            cong = max(cong, _rel(pfaffian(B @ A @ B.T), np.linalg.det(B) * p))
    return {"check": "pfaffian_suite", "params": {"count": count, "seed": seed},
            "rel_err": {"pf_squared": float(sq), "congruence": float(cong)}, "tol": tol,
            "pass": bool(max(sq, cong) <= tol)}
