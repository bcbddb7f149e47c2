"""Checks of the unquenched (massive) SOP, kernels and norms.

The mass-sign experiment builds the massive SOP from insertion points
a_f = m_f^2 (chiral) or +/- m_f (elliptic), i.e. from the expectation values of
prod det(m_f^2 - M), and measures their skew-orthogonality under the massive
weight with each sign of the mass factor.  Exactly one convention should make
the Gram matrix block diagonal; that one is reported as selected.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, SingularMassError
from ..massive import (
    MassiveContext,
    interpolation_radius,
    massive_even_sop,
    massive_kernel,
    massive_kernel_coeffs,
    massive_norm,
    massive_sop_coeffs,
    pfid_shift_check,
)
from ..sop import SkewPolyFamily, poly_eval
from ..weights import MassConvention, QuadratureSpec, WeightSpec, gram_matrix

__all__ = [
    "massive_sop_table",
    "massive_gram",
    "mass_convention_experiment",
    "check_massive_gram",
    "check_pfid",
    "check_decoupling",
    "check_hratio",
    "check_removable_singularity",
]


def _fam_params(fam: SkewPolyFamily) -> dict:
    p = fam.params
    if fam.is_hermite:
        return {"family": "hermite", "tau": p.param}
    return {"family": "laguerre", "nu": p.nu, "mu": p.param}


def massive_sop_table(ctx: MassiveContext, c: float = 0.0) -> np.ndarray:
    """Ascending coefficients of q^{(N_f)}_0 .. q^{(N_f)}_{2N+1}, one row each."""
    N = ctx.N
    out = np.zeros((2 * N + 2, 2 * N + 2), dtype=complex)
    for k in range(N + 1):
        sub = ctx.with_n_eigs(2 * k)
        e = massive_sop_coeffs(sub)
        o = massive_sop_coeffs(sub, odd=True, c=c)
        out[2 * k, : e.size] = e
        out[2 * k + 1, : o.size] = o
    return _real_if_close(out)


def _real_if_close(C):
    if np.all(np.abs(C.imag) <= 1e-9 * max(np.max(np.abs(C)), 1e-300)):
        return C.real
    return C


def massive_gram(coeffs: np.ndarray, weight: WeightSpec, q: QuadratureSpec | None = None) -> np.ndarray:
    """Gram matrix <p_i|p_j> of polynomials given by ascending coefficient rows."""
    coeffs = np.asarray(coeffs)
    deg = coeffs.shape[1] - 1 + len(weight.masses) * (1 if weight.is_chiral else 2)

    def funcs(p):
        return np.stack([poly_eval(row, p) if np.isrealobj(row) else _peval(row, p) for row in coeffs])

    return gram_matrix(funcs, weight, q or QuadratureSpec(), degree=max(deg, 1))


def _peval(c, z):
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for a in reversed(c):
        out = out * z + a
    return out


def _gram_errors(G: np.ndarray, norms) -> dict:
    """Deviation from the skew block structure with h_k on the superdiagonal.

    Off-structure entries are measured relative to sqrt(|h_i h_j|) with
    h_{2k} = h_{2k+1} = h_k; block entries relative to h_k.
    """
    n = G.shape[0]
    hs = np.repeat(np.abs(np.asarray(norms, dtype=complex)), 2)[:n]
    off = 0.0
    for i in range(n):
        for j in range(n):
            if i // 2 == j // 2 and i != j:
                continue
            off = max(off, abs(G[i, j]) / math.sqrt(hs[i] * hs[j]))
    diag = max(abs(G[2 * k, 2 * k + 1] - norms[k]) / abs(norms[k]) for k in range(n // 2))
    return {"off_structure": float(off), "block": float(diag)}


def check_massive_gram(fam: SkewPolyFamily, masses, N: int,
                       convention: MassConvention = MassConvention.MINUS,
                       tol: float | None = None, q: QuadratureSpec | None = None) -> dict:
    """Massive SOP (built from the m^2 insertion points) under one sign of the mass factor."""
    ctx = MassiveContext(fam, tuple(masses), 2 * N)
    tol = tol if tol is not None else (1e-5 if fam.is_hermite else 1e-3)
    C = massive_sop_table(ctx)
    w = WeightSpec(fam.ensemble(N, ctx.masses), True, MassConvention(convention))
    G = massive_gram(C, w, q)
    norms = [massive_norm(ctx.with_n_eigs(2 * k + 2), k) for k in range(N + 1)]
    err = _gram_errors(G, norms)
    params = _fam_params(fam)
    params.update({"masses": list(ctx.masses), "N": N, "convention": MassConvention(convention).value})
    return {"check": "massive_gram", "params": params, "rel_err": err, "tol": tol,
            "pass": bool(max(err.values()) <= tol)}


def mass_convention_experiment(fam: SkewPolyFamily, masses, N: int = 1, tol: float | None = None,
                               q: QuadratureSpec | None = None) -> dict:
    """Run the massive Gram test under both mass-factor signs and select the passing one."""
    runs = {c.value: check_massive_gram(fam, masses, N, c, tol, q) for c in MassConvention}
    passing = [k for k, r in runs.items() if r["pass"]]
    selected = passing[0] if len(passing) == 1 else None
    params = _fam_params(fam)
    params.update({"masses": [float(m) for m in masses], "N": N})
    return {
        "check": "mass_convention",
        "params": params,
        "runs": {k: r["rel_err"] for k, r in runs.items()},
        "selected": selected,
        "tol": runs[MassConvention.MINUS.value]["tol"],
        "pass": selected is not None,
    }


def check_pfid(fam: SkewPolyFamily, masses, N: int = 1, rtol: float = 1e-10) -> dict:
    """Shift invariance of the bordered Pfaffian under K_{2N} -> K_{2N+2} (odd point count)."""
    ctx = MassiveContext(fam, tuple(masses), 2 * N)
    r = pfid_shift_check(ctx, rtol=rtol)
    params = _fam_params(fam)
    params.update({"masses": list(ctx.masses), "N": N})
    return {"check": "pfid", "params": params, "lhs": complex(r["lhs"]), "rhs": complex(r["rhs"]),
            "rel_err": r["rel_err"], "vanishing": r["vanishing"], "tol": rtol, "pass": r["pass"]}


def _probe_points():
    return np.array([0.3 + 0.2j, -1.1, 2.5]), np.array([1.7, -0.4 + 1.0j, 0.2])


def check_decoupling(fam: SkewPolyFamily, nf: int, N: int, m2: float = 1e6, tol: float = 1e-3,
                     odd: bool = True) -> dict:
    """Heavy flavours decouple: massive quantities approach the quenched ones.

    Masses are sqrt(m2) * (1, 1.1, 1.2, ...).  Compared at fixed probe points:
    q_{2N} directly; the kernel after multiplying by prod_l a_l^2 (each
    insertion point contributes a factor a_l to each argument's normalisation);
    q_{2N+1} modulo the q_{2N} direction, by matching the z^{2N} coefficient.
    """
    masses = math.sqrt(m2) * (1.0 + 0.1 * np.arange(nf))
    ctx = MassiveContext(fam, tuple(masses), 2 * N)
    z, u = _probe_points()
    n = 2 * N
    e_even = float(np.max(np.abs(massive_even_sop(ctx, z) / fam.q(n, z) - 1)))
    K = massive_kernel(ctx, z, u) * np.prod(ctx.points) ** 2
    e_kernel = float(np.max(np.abs(K / fam.kernel(n, z, u) - 1)))
    errs = {"even_sop": e_even, "kernel": e_kernel}
    if odd:
        co = massive_sop_coeffs(ctx, odd=True)
        ce = np.pad(massive_sop_coeffs(ctx), (0, 1))
        q0 = np.array([float(x) for x in fam.coeffs(n + 1)])
        diff = co - q0 - (co[n] - q0[n]) * ce
        errs["odd_sop_mod_even"] = float(np.max(np.abs(diff)) / np.max(np.abs(q0)))
    params = _fam_params(fam)
    params.update({"nf": nf, "N": N, "m2": m2})
    return {"check": "decoupling", "params": params, "rel_err": errs, "tol": tol,
            "pass": bool(max(errs.values()) <= tol)}


def check_hratio(fam: SkewPolyFamily, masses, N: int, tol: float = 1e-8) -> dict:
    """Leading kernel coefficient: [z^{2N-1} u^{2N-2}] K^{(N_f)}_{2N} = 1 / h^{(N_f)}_{N-1}."""
    if N < 1:
        raise DomainError("needs N >= 1")
    ctx = MassiveContext(fam, tuple(masses), 2 * N)
    C = massive_kernel_coeffs(ctx)
    h = massive_norm(ctx)
    val = complex(C[2 * N - 1, 2 * N - 2] * h)
    rel = abs(val - 1)
    params = _fam_params(fam)
    params.update({"masses": list(ctx.masses), "N": N, "radius": interpolation_radius(ctx)})
    return {"check": "hratio", "params": params, "value": val, "rel_err": float(rel), "tol": tol,
            "pass": bool(rel <= tol)}


def check_removable_singularity(fam: SkewPolyFamily, masses, N: int = 1,
                                eps=(1e-4, 1e-5, 1e-6), tol: float = 1e-3) -> dict:
    """q^{(N_f)}_{2N} is regular at the insertion points.

    For each point a the values at a +/- eps are finite and their central
    difference (f(a+e) - f(a-e)) / 2e is the same for every eps, i.e. the
    values agree to first order in eps.
    """
    ctx = MassiveContext(fam, tuple(masses), 2 * N)
    worst = 0.0
    details = []
    for a in ctx.points:
        scale = 1 + abs(a)
        vals = {e: (massive_even_sop(ctx, a + e * scale), massive_even_sop(ctx, a - e * scale)) for e in eps}
        slopes = [(p - m) / (2 * e * scale) for e, (p, m) in vals.items()]
        mids = [0.5 * (p + m) for p, m in vals.values()]
        ref_s, ref_m = slopes[-1], mids[-1]
        ds = max(abs(s - ref_s) for s in slopes) / max(abs(ref_s), abs(ref_m) / scale, 1e-300)
        dm = max(abs(v - ref_m) for v in mids) / max(abs(ref_m), abs(ref_s) * scale, 1e-300)
        if not (np.isfinite(ds) and np.isfinite(dm)):
            raise SingularMassError("massive SOP not finite near an insertion point")
        worst = max(worst, ds, dm)
        details.append({"point": complex(a), "value": complex(ref_m), "slope": complex(ref_s)})
    params = _fam_params(fam)
    params.update({"masses": list(ctx.masses), "N": N, "eps": list(eps)})
    return {"check": "removable_singularity", "params": params, "points": details,
            "rel_err": float(worst), "tol": tol, "pass": bool(worst <= tol)}
