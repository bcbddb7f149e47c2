"""Skew-orthogonality of the quenched families and the Laurent behaviour of t_n."""
from __future__ import annotations

import math

import numpy as np

from ..sop import SkewPolyFamily, cauchy_transform
from ..weights import QuadratureSpec, gram_matrix

__all__ = ["sop_gram", "check_skew_orthogonality", "laurent_coefficient", "check_laurent"]


def _fam_params(fam: SkewPolyFamily) -> dict:
    p = fam.params
    if fam.is_hermite:
        return {"family": "hermite", "tau": p.param, "c": fam.c}
    return {"family": "laguerre", "nu": p.nu, "mu": p.param, "c": fam.c}


def sop_gram(fam: SkewPolyFamily, kmax: int, q: QuadratureSpec | None = None) -> np.ndarray:
    """G_ij = <q_i|q_j> for i, j <= kmax by quadrature."""

    def funcs(p):
        return fam.q_all(kmax, p)

    return gram_matrix(funcs, fam.weight(), q or QuadratureSpec(), degree=kmax)


def check_skew_orthogonality(fam: SkewPolyFamily, kmax: int, tol: float,
                             q: QuadratureSpec | None = None) -> dict:
    """Block structure of the Gram matrix with the closed-form norms.

    * off-structure entries: |G_ij| <= tol sqrt(h_i h_j), h_{2k} = h_{2k+1} = h_k;
    * block entries: G_{2k,2k+1} = -G_{2k+1,2k} = h_k within tol relative;
    * norm ratios: G_{2k+2,2k+3} / G_{2k,2k+1} = h_{k+1} / h_k within tol relative.
    """
    G = sop_gram(fam, kmax, q)
    n = kmax + 1
    h = [fam.norm(k) for k in range((n + 1) // 2)]
    hs = np.repeat(h, 2)[:n]
    off = 0.0
    for i in range(n):
        for j in range(n):
            if i // 2 == j // 2 and i != j:
                continue
            off = max(off, abs(G[i, j]) / math.sqrt(hs[i] * hs[j]))
    block = 0.0
    for k in range(n // 2):
        block = max(block, abs(G[2 * k, 2 * k + 1] - h[k]) / h[k], abs(G[2 * k + 1, 2 * k] + h[k]) / h[k])
    ratio = 0.0
    for k in range(n // 2 - 1):
        got = G[2 * k + 2, 2 * k + 3] / G[2 * k, 2 * k + 1]
        want = float(fam.norm_ratio_exact(k + 1, k))
        ratio = max(ratio, abs(got / want - 1))
    errs = {"off_structure": float(off), "block": float(block), "norm_ratio": float(ratio)}
    params = _fam_params(fam)
    params["kmax"] = kmax
    return {"check": "skew_orthogonality", "params": params, "rel_err": errs, "tol": tol,
            "pass": bool(max(errs.values()) <= tol)}


def laurent_coefficient(fam: SkewPolyFamily, n: int, kappa: complex, q: QuadratureSpec | None = None) -> dict:
    """Leading Laurent coefficient of t_n at infinity, normalised to +/- h_{n//2}.

    t_{2k} = h_k / kappa^{2k+2} + O(kappa^{-2k-3}) and
    t_{2k+1} = -h_k / kappa^{2k+1} + O(kappa^{-2k-2}).  The ratio
    L(kappa) = t_n kappa^p / (sign h) is 1 + a / kappa + ...; the first-order
    term is removed by Richardson extrapolation from kappa and kappa / 2,
    2 L(kappa) - L(kappa / 2).  The partner point is taken inside rather than
    outside because t_n kappa^p suffers cancellation growing like |kappa|^{n+1}
    in the quadrature sum.  Both the raw and the extrapolated ratio are
    returned.
    """
    kappa = complex(kappa)
    k = n // 2
    p, sign = (n + 2, 1.0) if n % 2 == 0 else (n, -1.0)
    ref = sign * fam.norm(k)

    def L(kap):
        return complex(cauchy_transform(fam, n, kap, q)) * kap**p / ref

    l1, l2 = L(kappa), L(0.5 * kappa)
    return {"raw": l1, "raw_half_kappa": l2, "extrapolated": 2 * l1 - l2}


def check_laurent(fam: SkewPolyFamily, n: int, kappa: complex = 1e3j, tol: float = 1e-2,
                  q: QuadratureSpec | None = None) -> dict:
    """Leading Laurent coefficient of t_n reproduces +/- h_{n//2} within ``tol``."""
    r = laurent_coefficient(fam, n, kappa, q)
    err = abs(r["extrapolated"] - 1)
    params = _fam_params(fam)
    params.update({"n": n, "kappa": [complex(kappa).real, complex(kappa).imag]})
    return {"check": "laurent", "params": params, "raw_ratio": r["raw"], "extrapolated_ratio": r["extrapolated"],
            "raw_err": float(abs(r["raw"] - 1)), "rel_err": float(err), "tol": tol, "pass": bool(err <= tol)}
