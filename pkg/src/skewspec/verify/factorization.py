"""Partition function computed sector by sector versus the Pfaffian of moments.

Z_{2N} is defined by the pair measure of the skew product,

    Z_{2N} = int prod_j dmu(u_j, v_j) Delta(u_1, v_1, ..., u_N, v_N) = N! Pf[<z^a|z^b>],

with dmu = h h 1{x1 < x2} dx1 dx2 (two real eigenvalues) + 2i g(z) dz at v = z*
(a conjugate pair).  Expanding the product splits Z_{2N} into sectors of
K real eigenvalues and M pairs.  Each sector is integrated directly here with
an engine that shares nothing with :mod:`skewspec.weights` beyond the weight
functions themselves: scipy's adaptive quad for N = 1 and tensor
Gauss-Legendre on simplex coordinates for N = 2.

Sector integrands (N = 2, after collecting the signed orderings):

    4 real        2! * int_{x1<x2<x3<x4} Delta(x) h^4
    2 real + pair 2  * int_{x1<x2} int_UHP 4y (x2-x1)|z-x1|^2|z-x2|^2 h h g
    2 pairs       int_UHP int_UHP 16 y1 y2 |z2-z1|^2 |z2-z1*|^2 g g
"""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate

from ..ensembles import EnsembleSpec, Model
from ..errors import DomainError, QuadratureError
from ..skewlinalg import pfaffian
from ..sop import SkewPolyFamily
from ..weights import QuadratureSpec, WeightSpec, gram_matrix, integration_domain, weight_g, weight_h

__all__ = [
    "sector_sum_n1",
    "sector_sum_n2_ginibre",
    "pfaffian_route",
    "check_factorization",
    "check_zprod",
]


def _quenched(spec: EnsembleSpec) -> WeightSpec:
    return WeightSpec(spec.with_masses(()), includes_masses=False)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _extent(w: WeightSpec, degree: int):
    dom = integration_domain(w, QuadratureSpec(tail=1e-20), degree)
    return dom


# ---------------------------------------------------------------- N = 1


def sector_sum_n1(spec: EnsembleSpec, epsabs: float = 0.0, epsrel: float = 1e-9) -> dict:
    """Z_2 as (real-real sector) + (pair sector) by nested scipy quad.

    a = int_{x1<x2} h(x1) h(x2) (x2 - x1),  b = int_UHP 4 Im(z) g(z).
    """
    w = _quenched(spec)
    dom = _extent(w, 2)
    lo, hi = dom.real_lo, dom.real_hi

    def h(x):
        return float(weight_h(w, x))

    kw = dict(epsabs=epsabs, epsrel=epsrel, limit=200)
    brk = [0.0] if w.is_chiral else []

    def tail_moments(x1):
        pts = [p for p in brk if p > x1]
        i0 = integrate.quad(h, x1, hi, points=pts or None, **kw)[0]
        i1 = integrate.quad(lambda t: t * h(t), x1, hi, points=pts or None, **kw)[0]
        return i1 - x1 * i0

    with warnings.catch_warnings():
        # the inner tails underflow far out; the outer integral is unaffected
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        a = integrate.quad(lambda x: h(x) * tail_moments(x), lo, hi, points=brk or None, **kw)[0]

    def g(y, x):
        return 4.0 * y * weight_g(w, complex(x, y))

    b = 0.0
    xs = [dom.cx_lo, 0.0, dom.cx_hi] if w.is_chiral else [dom.cx_lo, dom.cx_hi]
    for x0, x1 in zip(xs[:-1], xs[1:]):
        b += integrate.dblquad(g, x0, x1, 1e-300, dom.cy_hi, epsabs=epsabs, epsrel=epsrel)[0]
    return {"real_real": a, "pair": b, "Z": a + b}


# ---------------------------------------------------------------- N = 2


def _gl(n, a, b):
    x, wt = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * wt


def _ginibre_sectors(tau: float, n: int):
    w = _quenched(EnsembleSpec.ginibre(0, tau))
    s = math.sqrt(1 + tau)
    L = 11.0 * s
    S = 2 * L
    Y = 6.0 * math.sqrt(1 - tau * tau) / math.sqrt(2) + 1e-3
    X = 11.0 * s

    def h(x):
        return np.exp(-x * x / (2 * (1 + tau)))

    def g(x, y):
        return weight_g(w, x + 1j * y)

    t, wt = _gl(n, -L, L)
    d, wd = _gl(n, 0.0, S)
    # 4 real: x1 = t, x2 = t + d1, x3 = x2 + d2, x4 = x3 + d3
    D1, D2, D3 = np.meshgrid(d, d, d, indexing="ij")
    W3 = wd[:, None, None] * wd[None, :, None] * wd[None, None, :]
    x2r, x3r, x4r = D1, D1 + D2, D1 + D2 + D3
    vdm = D1 * x3r * x4r * D2 * (D2 + D3) * D3
    rr = 0.0
    for ti, wi in zip(t, wt):
        rr += wi * np.sum(W3 * vdm * h(ti) * h(ti + x2r) * h(ti + x3r) * h(ti + x4r))
    rr *= 2.0

    # 2 real + 1 pair: x1 = t, x2 = t + d; z = x + i y
    xg, wx = _gl(n, -X, X)
    yg, wy = _gl(n, 0.0, Y)
    XX, YY = np.meshgrid(xg, yg, indexing="ij")
    WZ = wx[:, None] * wy[None, :]
    G = g(XX, YY) * 4.0 * YY * WZ
    rc = 0.0
    for ti, wi in zip(t, wt):
        x1 = ti
        x2 = ti + d
        hh = wi * wd * h(x1) * h(x2) * d
        a1 = (XX - x1) ** 2 + YY * YY
        a2 = (XX[None] - x2[:, None, None]) ** 2 + YY[None] ** 2
        rc += np.sum(hh[:, None, None] * a1[None] * a2 * G[None])
    rc *= 2.0

    # 2 pairs
    Z = (XX + 1j * YY).ravel()
    Gv = (g(XX, YY) * YY * WZ).ravel()
    cc = 0.0
    for zi, gi in zip(Z, Gv):
        cc += gi * np.sum(Gv * np.abs(Z - zi) ** 2 * np.abs(Z - np.conj(zi)) ** 2)
    cc *= 16.0
    return {"4_real": float(rr), "2_real_1_pair": float(rc), "2_pairs": float(cc),
            "Z": float(rr + rc + cc)}


def sector_sum_n2_ginibre(tau: float, orders=(48, 64)) -> dict:
    """Z_4 for the elliptic model from its three sectors; two Gauss-Legendre orders
    are compared and their difference is returned as ``quad_err``."""
    res = [_ginibre_sectors(tau, n) for n in orders]
    out = dict(res[-1])
    out["quad_err"] = abs(res[-1]["Z"] - res[0]["Z"]) / abs(res[-1]["Z"])
    return out


# ---------------------------------------------------------------- Pfaffian route


def pfaffian_route(spec: EnsembleSpec, N: int, q: QuadratureSpec | None = None) -> dict:
    """N! Pf of the 2N x 2N monomial Gram matrix from :func:`weights.gram_matrix`."""
    w = _quenched(spec)
    q = q or QuadratureSpec(rel_tol=1e-11)
    pw = np.arange(2 * N)

    def funcs(p):
        return np.asarray(p)[None, :] ** pw[:, None]

    G = gram_matrix(funcs, w, q, degree=max(2 * N - 1, 1))
    pf = pfaffian(G)
    return {"gram": G, "pfaffian": complex(pf), "Z": complex(math.factorial(N) * pf)}


def _family(spec: EnsembleSpec) -> SkewPolyFamily:
    if spec.model is Model.CHIRAL:
        return SkewPolyFamily.laguerre(spec.nu, spec.mu)
    return SkewPolyFamily.hermite(spec.tau)


def check_factorization(spec: EnsembleSpec, N: int = 1, tol: float | None = None) -> dict:
    """Compare Z_{2N} from the sector sum, the Pfaffian of moments and N! prod h_k."""
    if N not in (1, 2):
        raise DomainError("check_factorization supports N = 1 or 2")
    if N == 2 and spec.model is not Model.GINIBRE:
        raise DomainError("the N = 2 sector integration is implemented for the elliptic model")
    tol = tol if tol is not None else (1e-6 if N == 1 else 1e-4)
    fam = _family(spec)
    analytic = math.factorial(N) * math.prod(fam.norm(k) for k in range(N))
    if N == 1:
        sectors = sector_sum_n1(spec)
    else:
        sectors = sector_sum_n2_ginibre(spec.tau)
    pf = pfaffian_route(spec, N)
    zs, zp = sectors["Z"], pf["Z"]
    errs = {
        "sectors_vs_pfaffian": float(_rel(zs, zp)),
        "sectors_vs_norms": float(_rel(zs, analytic)),
        "pfaffian_vs_norms": float(_rel(zp, analytic)),
    }
    params = {"model": spec.model.value, "N": N}
    params.update({"tau": spec.tau} if spec.model is Model.GINIBRE else {"nu": spec.nu, "mu": spec.mu})
    return {
        "check": "factorization",
        "params": params,
        "sectors": {k: v for k, v in sectors.items()},
        "Z_sectors": float(zs),
        "Z_pfaffian": float(zp.real),
        "Z_norms": float(analytic),
        "rel_err": errs,
        "tol": tol,
        "pass": bool(max(errs.values()) <= tol),
    }


def check_zprod(spec: EnsembleSpec, N: int, tol: float = 1e-5) -> dict:
    """Pf of the monomial moment matrix against prod_{k<N} h_k."""
    if not 1 <= N <= 3:
        raise DomainError("check_zprod supports 1 <= N <= 3")
    fam = _family(spec)
    pf = pfaffian_route(spec, N)["pfaffian"]
    target = math.prod(fam.norm(k) for k in range(N))
    rel = _rel(pf, target)
    if not np.isfinite(rel):
        raise QuadratureError("non-finite moment Pfaffian")
    params = {"model": spec.model.value, "N": N}
    params.update({"tau": spec.tau} if spec.model is Model.GINIBRE else {"nu": spec.nu, "mu": spec.mu})
    return {"check": "zprod", "params": params, "pfaffian": float(pf.real), "target": target,
            "rel_err": float(rel), "tol": tol, "pass": bool(rel <= tol)}
