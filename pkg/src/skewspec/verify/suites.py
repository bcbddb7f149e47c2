"""Named verification suites and the report format shared with the CLI.

Every check yields a plain dict with at least ``check``, ``params`` and
``verdict`` ("pass" or "fail"); complex numbers are stored as [re, im].
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..ensembles import EnsembleSpec
from ..errors import SkewSpecError
from ..massive import MassiveContext
from ..sop import SkewPolyFamily
from .factorization import check_factorization, check_zprod
from .identities import check_debruijn, check_pfaffian_suite, check_vandermonde_suite
from .massive_checks import (
    check_decoupling,
    check_hratio,
    check_massive_gram,
    check_pfid,
    check_removable_singularity,
    mass_convention_experiment,
)
from .mc import McReport, mc_cauchy, mc_even_sop, mc_massive, mc_odd_sop, mc_two_dets
from .orthogonality import check_laurent, check_skew_orthogonality

__all__ = ["SUITES", "SuiteOptions", "run_suite", "run_suites", "normalize", "jsonable"]

SUITES = ("skew-orthogonality", "mc", "identities", "factorization", "massive")


@dataclass(frozen=True)
class SuiteOptions:
    """Knobs shared by all suites.  ``full`` selects the acceptance-size grids."""

    samples: int = 100_000
    seed: int = 1
    threads: int = 1
    full: bool = False


def jsonable(x):
    """Recursively convert numpy and complex values to JSON-friendly types."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_num(x.real), _num(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return _num(x)
    return x


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def normalize(result) -> dict:
    """Report dict with a ``verdict`` field, from an McReport or a check dict."""
    if isinstance(result, McReport):
        d = result.to_dict()
    else:
        d = dict(result)
        ok = d.pop("pass")
        d["verdict"] = "pass" if ok else "fail"
    return jsonable(d)


def _error_report(check: str, params: dict, exc: Exception) -> dict:
    return {"check": check, "params": jsonable(params), "verdict": "fail", "error": f"{type(exc).__name__}: {exc}"}


def _guard(check: str, params: dict, fn):
    try:
        return normalize(fn())
    except SkewSpecError as exc:
        return _error_report(check, params, exc)


# ---------------------------------------------------------------- suites


def _hermite_taus(full):
    return (0.1, 0.5, 0.9) if full else (0.5,)


def _laguerre_grid(full):
    return [(nu, mu) for nu in (0, 1, 2) for mu in (0.3, 0.7)] if full else [(1, 0.6)]


def suite_skew_orthogonality(opt: SuiteOptions):
    out = []
    for tau in _hermite_taus(opt.full):
        fam = SkewPolyFamily.hermite(tau, c=0.7)
        out.append(_guard("skew_orthogonality", {"tau": tau}, lambda: check_skew_orthogonality(fam, 7, 1e-6)))
    for nu, mu in _laguerre_grid(opt.full):
        fam = SkewPolyFamily.laguerre(nu, mu, c=0.7)
        out.append(_guard("skew_orthogonality", {"nu": nu, "mu": mu},
                          lambda: check_skew_orthogonality(fam, 5, 1e-3)))
    return out


PROBES = (0.7, -1.3 + 0.5j, 2.1 + 1.2j)


def _mc_specs():
    return [EnsembleSpec.ginibre(0, 0.5), EnsembleSpec.chiral(0, 1, 0.6)]


def suite_mc(opt: SuiteOptions):
    kw = dict(samples=opt.samples, seed=opt.seed, threads=opt.threads)
    out = []
    for spec in _mc_specs():
        for n in (1, 2):
            for z in PROBES:
                out.append(normalize(mc_even_sop(spec, 2 * n, z, **kw)))
                out.append(normalize(mc_odd_sop(spec, 2 * n, z, c=0.4, **kw)))
                out.append(normalize(mc_two_dets(spec, 2 * n, z, -0.6 + 0.2j, **kw)))
    specs = _mc_specs() if opt.full else _mc_specs()[:1]
    for spec in specs:
        for n in (0, 1):
            for mode in ("even", "odd"):
                out.append(_guard("cauchy", {"model": spec.model.value, "n": n, "mode": mode},
                                  lambda: mc_cauchy(spec, 2 * n + 2, mode=mode, c=0.3, **kw)))
    fams = [SkewPolyFamily.hermite(0.5), SkewPolyFamily.laguerre(1, 0.6)] if opt.full else [SkewPolyFamily.hermite(0.5)]
    for fam in fams:
        for n in range(4):
            out.append(_guard("laurent", {"n": n}, lambda: check_laurent(fam, n)))
    return out


def suite_identities(opt: SuiteOptions):
    out = []
    for n in (0, 1, 2):
        for m in (0, 1):
            if n == 0 and m == 0:
                continue
            for alpha in ("random", "unit"):
                out.append(normalize(check_debruijn(n, m, alpha=alpha, seed=opt.seed)))
    out.append(normalize(check_vandermonde_suite(8, seed=opt.seed)))
    out.append(normalize(check_pfaffian_suite(200, seed=opt.seed)))
    return out


def suite_factorization(opt: SuiteOptions):
    out = []
    specs = [EnsembleSpec.ginibre(0, 0.5), EnsembleSpec.chiral(0, 1, 0.5)]
    for spec in specs:
        out.append(_guard("factorization", {"model": spec.model.value, "N": 1}, lambda: check_factorization(spec, 1)))
    out.append(_guard("factorization", {"model": "ginibre", "N": 2},
                      lambda: check_factorization(EnsembleSpec.ginibre(0, 0.5), 2)))
    for spec in specs:
        for N in (1, 2, 3):
            out.append(_guard("zprod", {"model": spec.model.value, "N": N}, lambda: check_zprod(spec, N)))
    return out


def suite_massive(opt: SuiteOptions):
    out = []
    H, L = SkewPolyFamily.hermite(0.5), SkewPolyFamily.laguerre(1, 0.6)
    selected = {}
    for fam, masses in ((H, (0.8,)), (L, (0.9,))):
        rep = _guard("mass_convention", {"family": "hermite" if fam.is_hermite else "laguerre"},
                     lambda: mass_convention_experiment(fam, masses, 1))
        out.append(rep)
        selected[fam.is_hermite] = rep.get("selected")
    grid = [(0.8,), (0.8, 1.4), (0.8, 1.4, 2.0)] if opt.full else [(0.8,), (0.8, 1.4)]
    for fam in (H, L):
        conv = selected.get(fam.is_hermite) or "minus-m-squared"
        for masses in grid:
            for N in ((1, 2) if opt.full else (1,)):
                out.append(_guard("massive_gram", {"masses": masses, "N": N},
                                  lambda: check_massive_gram(fam, masses, N, conv)))
    for masses, Ns in (((0.9,), (1, 2)), ((0.7, 1.2, 1.9), (1, 2)), ((0.5, 0.9, 1.3, 1.7, 2.2), (2, 3))):
        for N in Ns:
            out.append(_guard("pfid", {"masses": masses, "N": N}, lambda: check_pfid(L, masses, N)))
    for fam, nfs in ((H, (1,)), (L, (1, 2))):
        for nf in nfs:
            for N in (1, 2):
                out.append(_guard("decoupling", {"nf": nf, "N": N}, lambda: check_decoupling(fam, nf, N)))
    for fam in (H, L):
        for masses in ((0.8,), (0.8, 1.4, 2.0)):
            out.append(_guard("hratio", {"masses": masses}, lambda: check_hratio(fam, masses, 2)))
            out.append(_guard("removable_singularity", {"masses": masses},
                              lambda: check_removable_singularity(fam, masses, 1)))
    kw = dict(samples=opt.samples, seed=opt.seed, threads=opt.threads)
    for fam, masses in ((L, (1.2,)), (H, (0.8,))):
        ctx = MassiveContext(fam, masses, 2)
        for z in PROBES[:2]:
            out.append(normalize(mc_massive(ctx, "even", z, **kw)))
    return out


_RUNNERS = {
    "skew-orthogonality": suite_skew_orthogonality,
    "mc": suite_mc,
    "identities": suite_identities,
    "factorization": suite_factorization,
    "massive": suite_massive,
}


def run_suite(name: str, opt: SuiteOptions | None = None) -> list[dict]:
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    results = _RUNNERS[name](opt or SuiteOptions())
    for r in results:
        r["suite"] = name
    return results


def run_suites(names, opt: SuiteOptions | None = None) -> list[dict]:
    names = list(SUITES) if "all" in names else list(names)
    out = []
    for name in names:
        out.extend(run_suite(name, opt))
    return out
