"""Monte Carlo estimators of the expectation-value representations.

Every estimator draws matrices M (J for the elliptic model, A B^T for the
chiral one) of size n_eigs, evaluates a per-draw observable built from the
eigenvalues of M and compares the sample mean with an analytic target.

Sampling is split into fixed-size chunks; chunk j of stream s uses the
generator ``make_rng(seed, s, j)``, so the sample set depends only on
(seed, stream, samples) and not on the number of worker threads.
"""
from __future__ import annotations

import functools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ..ensembles import EnsembleSpec, Model, chiral_z_matrix, make_rng, sample_chiral_batch, sample_ginibre_batch
from ..errors import DomainError
from ..massive import (
    MassiveContext,
    massive_even_sop,
    massive_kernel,
    massive_norm,
    massive_odd_sop_normalized,
)
from ..sop import SkewPolyFamily, cauchy_transform
from ..weights import QuadratureSpec

__all__ = [
    "McReport",
    "SampleSet",
    "draw_samples",
    "mc_even_sop",
    "mc_odd_sop",
    "mc_two_dets",
    "mc_cauchy",
    "mc_char_polys",
    "mc_massive",
    "default_kappa",
    "with_rerun",
    "mean_estimate",
    "median_of_means",
]

CHUNK = 8192
MOM_BLOCKS = 16


@dataclass(frozen=True)
class McReport:
    """One Monte Carlo comparison.  ``sigma_distance`` is |estimate - target| / std_error."""

    check: str
    params: dict
    n_samples: int
    estimate: complex
    std_error: float
    target: complex
    sigma_distance: float
    threshold: float = 3.0
    reran: bool = False
    note: str = ""
    forced_fail: bool = False

    @property
    def passed(self) -> bool:
        return (not self.forced_fail) and self.sigma_distance <= self.threshold

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("estimate", "target"):
            v = complex(d[key])
            d[key] = [v.real, v.imag]
        d["sigma_distance"] = _finite(d["sigma_distance"])
        d["verdict"] = self.verdict
        del d["forced_fail"]
        return d


def _finite(x):
    return float(x) if math.isfinite(x) else None


# ---------------------------------------------------------------- sampling


@dataclass(frozen=True)
class SampleSet:
    """Eigenvalues (samples x n) and traces of the drawn matrices."""

    eigs: np.ndarray
    trace: np.ndarray

    @property
    def size(self) -> int:
        return self.trace.size

    def char_poly(self, z) -> np.ndarray:
        """det(z - M) for every draw."""
        return np.prod(complex(z) - self.eigs, axis=1)

    def spectral_radius(self) -> np.ndarray:
        if self.eigs.shape[1] == 0:
            return np.zeros(self.size)
        return np.abs(self.eigs).max(axis=1)


def _chunk(spec: EnsembleSpec, seed: int, stream: int, j: int, size: int):
    rng = make_rng(seed, stream, j)
    if spec.model is Model.CHIRAL:
        A, B = sample_chiral_batch(spec, rng, size)
        M = chiral_z_matrix(A, B)
    else:
        M = sample_ginibre_batch(spec, rng, size)
    tr = np.trace(M, axis1=1, axis2=2)
    if spec.n == 0:
        return np.zeros((size, 0), dtype=complex), tr
    return np.linalg.eigvals(M), tr


@functools.lru_cache(maxsize=16)
def _draw_cached(spec: EnsembleSpec, samples: int, seed: int, stream: int, threads: int) -> SampleSet:
    sizes = [CHUNK] * (samples // CHUNK)
    if samples % CHUNK:
        sizes.append(samples % CHUNK)
    jobs = list(enumerate(sizes))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda js: _chunk(spec, seed, stream, *js), jobs))
    else:
        parts = [_chunk(spec, seed, stream, j, s) for j, s in jobs]
    eigs = np.concatenate([p[0] for p in parts]) if parts else np.zeros((0, spec.n), complex)
    tr = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0)
    eigs.setflags(write=False)
    tr.setflags(write=False)
    return SampleSet(eigs, tr)


def draw_samples(spec: EnsembleSpec, n_eigs: int, samples: int, seed: int, stream: int = 0,
                 threads: int = 1) -> SampleSet:
    """Eigenvalues and traces of ``samples`` matrices of size n_eigs (cached)."""
    if n_eigs < 0:
        raise DomainError("n_eigs must be nonnegative")
    if samples < 2:
        raise DomainError("need at least two samples for an error estimate")
    return _draw_cached(spec.with_n(n_eigs).with_masses(()), int(samples), int(seed), int(stream), max(1, int(threads)))


# ---------------------------------------------------------------- estimators


def _complex_se(var_re, var_im, n):
    return math.sqrt((var_re + var_im) / n)


def mean_estimate(values) -> tuple[complex, float]:
    """Sample mean and its standard error (real and imaginary variances added)."""
    v = np.asarray(values, dtype=complex)
    n = v.size
    return complex(v.mean()), _complex_se(np.var(v.real, ddof=1), np.var(v.imag, ddof=1), n)


def median_of_means(values, blocks: int = MOM_BLOCKS) -> tuple[complex, float]:
    """Median of block means (componentwise) and its standard error.

    The error uses var(median) ~ (pi / 2) var(block mean) / blocks for
    approximately normal block means.
    """
    v = np.asarray(values, dtype=complex)
    if v.size < 2 * blocks:
        raise DomainError(f"median of means needs at least {2 * blocks} samples")
    m = v[: v.size - v.size % blocks].reshape(blocks, -1).mean(axis=1)
    est = complex(np.median(m.real), np.median(m.imag))
    se = math.sqrt(math.pi / 2) * _complex_se(np.var(m.real, ddof=1), np.var(m.imag, ddof=1), blocks)
    return est, se


def ratio_estimate(num, den) -> tuple[complex, float]:
    """Ratio of means with its delta-method standard error."""
    x = np.asarray(num, dtype=complex)
    y = np.asarray(den, dtype=complex)
    r = x.mean() / y.mean()
    resid = (x - r * y) / y.mean()
    return complex(r), _complex_se(np.var(resid.real, ddof=1), np.var(resid.imag, ddof=1), x.size)


def _report(check, params, n, est, se, target, threshold=3.0, note="", forced_fail=False):
    target = complex(target)
    diff = abs(est - target)
    if se > 0:
        dist = diff / se
    else:
        dist = 0.0 if diff <= 1e-12 * (1 + abs(target)) else math.inf
    return McReport(check, params, int(n), complex(est), float(se), target, float(dist), threshold,
                    note=note, forced_fail=forced_fail)


def _params(spec: EnsembleSpec, **extra):
    p = {"model": spec.model.value}
    if spec.model is Model.CHIRAL:
        p.update(nu=spec.nu, mu=spec.mu)
    else:
        p["tau"] = spec.tau
    for k, v in extra.items():
        if isinstance(v, complex) or isinstance(v, np.complexfloating):
            v = [float(v.real), float(v.imag)]
        p[k] = v
    return p


def with_rerun(run, samples: int):
    """Run ``run(samples, stream)``; on failure rerun once with 4x samples on a fresh stream."""
    rep = run(samples, 0)
    if rep.passed:
        return rep
    again = run(4 * samples, 1)
    return McReport(**{**again.__dict__, "reran": True})


def _rerun_wrapper(fn):
    @functools.wraps(fn)
    def wrapped(*args, rerun: bool = True, **kwargs):
        if not rerun:
            return fn(*args, **kwargs)
        samples = kwargs.pop("samples", 100_000)
        return with_rerun(lambda s, stream: fn(*args, samples=s, stream=stream, **kwargs), samples)

    return wrapped


@_rerun_wrapper
def mc_even_sop(spec: EnsembleSpec, n_eigs: int, z, samples: int = 100_000, seed: int = 0,
                stream: int = 0, threads: int = 1) -> McReport:
    """<det(z - M)> over n_eigs x n_eigs matrices vs q_{n_eigs}(z)."""
    _even(n_eigs)
    fam = SkewPolyFamily.from_ensemble(spec)
    S = draw_samples(spec, n_eigs, samples, seed, stream, threads)
    est, se = mean_estimate(S.char_poly(z))
    return _report("even_sop", _params(spec, n_eigs=n_eigs, z=complex(z)), S.size, est, se, fam.q(n_eigs, complex(z)))


@_rerun_wrapper
def mc_odd_sop(spec: EnsembleSpec, n_eigs: int, z, c: float = 0.0, samples: int = 100_000, seed: int = 0,
               stream: int = 0, threads: int = 1) -> McReport:
    """<det(z - M) (Tr M + z + c)> vs q_{n_eigs + 1}(z) with constant c."""
    _even(n_eigs)
    fam = SkewPolyFamily.from_ensemble(spec, c)
    S = draw_samples(spec, n_eigs, samples, seed, stream, threads)
    z = complex(z)
    est, se = mean_estimate(S.char_poly(z) * (S.trace + z + c))
    return _report("odd_sop", _params(spec, n_eigs=n_eigs, z=z, c=c), S.size, est, se, fam.q(n_eigs + 1, z))


@_rerun_wrapper
def mc_two_dets(spec: EnsembleSpec, n_eigs: int, z, u, samples: int = 100_000, seed: int = 0,
                stream: int = 0, threads: int = 1) -> McReport:
    """<det(z - M) det(u - M)> vs h_N K_{2N+2}(z, u) / (z - u), N = n_eigs / 2."""
    N = _even(n_eigs)
    z, u = complex(z), complex(u)
    if z == u:
        raise DomainError("two-determinant check needs z != u")
    fam = SkewPolyFamily.from_ensemble(spec)
    S = draw_samples(spec, n_eigs, samples, seed, stream, threads)
    est, se = mean_estimate(S.char_poly(z) * S.char_poly(u))
    target = fam.norm(N) * fam.kernel(n_eigs + 2, z, u) / (z - u)
    return _report("two_dets", _params(spec, n_eigs=n_eigs, z=z, u=u), S.size, est, se, target)


def default_kappa(spec: EnsembleSpec, n_eigs: int, seed: int = 0, factor: float = 3.0,
                  samples: int = 100_000, stream: int = 0) -> complex:
    """factor x (99th percentile of the spectral radius), on the positive imaginary axis.

    The imaginary direction keeps the pole away from the real eigenvalues
    and from the bulk of the chiral weight on the positive axis.
    """
    S = draw_samples(spec, n_eigs, samples, seed, stream)
    r = float(np.percentile(S.spectral_radius(), 99))
    return 1j * factor * max(r, 1.0)


@_rerun_wrapper
def mc_cauchy(spec: EnsembleSpec, n_eigs: int, kappa=None, mode: str = "even", c: float = 0.0,
              samples: int = 100_000, seed: int = 0, stream: int = 0, threads: int = 1,
              quad: QuadratureSpec | None = None, margin: float = 3.0) -> McReport:
    """Median-of-means estimate of h_n <1/det(kappa - M)> (even) or
    h_n <(Tr M - kappa + c)/det(kappa - M)> (odd) over n_eigs = 2n + 2
    eigenvalues, against the quadrature Cauchy transform t_{2n} or t_{2n+1}.

    The odd observable carries +c so that it matches q_{2n+1} = ... + c q_{2n},
    the same constant as in <det(z - M)(Tr M + z + c)>.  With kappa omitted,
    kappa = 3i x (99th percentile of the sampled spectral radius).
    """
    N = _even(n_eigs)
    if N < 1:
        raise DomainError("Cauchy transforms average over n_eigs = 2n + 2 >= 2 eigenvalues")
    if mode not in ("even", "odd"):
        raise DomainError(f"mode must be 'even' or 'odd', got {mode!r}")
    n = N - 1
    fam = SkewPolyFamily.from_ensemble(spec, c)
    S = draw_samples(spec, n_eigs, samples, seed, stream, threads)
    radius = float(np.percentile(S.spectral_radius(), 99))
    if kappa is None:
        kappa = 1j * margin * max(radius, 1.0)
    kappa = complex(kappa)
    note, bad = "", False
    if abs(kappa) < margin * radius * (1 - 1e-12):
        note = f"|kappa| = {abs(kappa):.3g} is below {margin:g} x spectral radius {radius:.3g}; variance unreliable"
        warnings.warn(note, RuntimeWarning, stacklevel=2)
        bad = True
    inv = 1.0 / S.char_poly(kappa)
    if mode == "odd":
        inv = inv * (S.trace - kappa + c)
    est, se = median_of_means(fam.norm(n) * inv)
    k = 2 * n + (mode == "odd")
    target = cauchy_transform(fam, k, kappa, quad)
    params = _params(spec, n_eigs=n_eigs, kappa=kappa, mode=mode, c=c, index=k)
    return _report(f"cauchy_{mode}", params, S.size, est, se, target, note=note, forced_fail=bad)


@_rerun_wrapper
def mc_char_polys(spec: EnsembleSpec, n_eigs: int, points, target, samples: int = 100_000, seed: int = 0,
                  stream: int = 0, threads: int = 1) -> McReport:
    """<prod_l det(a_l - M)> against a given target."""
    _even(n_eigs)
    S = draw_samples(spec, n_eigs, samples, seed, stream, threads)
    vals = np.ones(S.size, dtype=complex)
    for a in np.atleast_1d(points):
        vals = vals * S.char_poly(a)
    est, se = mean_estimate(vals)
    pts = [complex(a) for a in np.atleast_1d(points)]
    params = _params(spec, n_eigs=n_eigs, points=[[p.real, p.imag] for p in pts])
    return _report("char_polys", params, S.size, est, se, target)


@_rerun_wrapper
def mc_massive(ctx: MassiveContext, kind: str, z, u=None, c: float = 0.0, samples: int = 100_000,
               seed: int = 0, stream: int = 0, threads: int = 1) -> McReport:
    """Massive quantities as ratios of quenched averages with the flavour factor
    W = prod_l det(a_l - M):

    ``even``: <det(z - M) W> / <W>                 vs q^{(N_f)}_{2N}(z)
    ``odd``:  <det(z - M)(Tr M + z + c) W> / <W>   vs q^{(N_f)}_{2N+1}(z) whose
              z^{2N} coefficient is fixed to c (the same convention as the
              quenched q_1 = z + c)
    ``two_dets``: <det(z - M) det(u - M) W> / <W>  vs h^{(N_f)}_N K^{(N_f)}_{2N+2}(z, u) / (z - u)
    """
    fam = ctx.quenched
    spec = fam.ensemble(0)
    N = ctx.N
    S = draw_samples(spec, ctx.n_eigs, samples, seed, stream, threads)
    W = np.ones(S.size, dtype=complex)
    for a in ctx.points:
        W = W * S.char_poly(a)
    z = complex(z)
    dz = S.char_poly(z)
    if kind == "even":
        num = dz * W
        target = massive_even_sop(ctx, z)
    elif kind == "odd":
        num = dz * (S.trace + z + c) * W
        target = massive_odd_sop_normalized(ctx, z, c)
    elif kind == "two_dets":
        u = complex(u)
        if u == z:
            raise DomainError("two-determinant check needs z != u")
        num = dz * S.char_poly(u) * W
        up = ctx.with_n_eigs(ctx.n_eigs + 2)
        target = massive_norm(up, N) * massive_kernel(up, z, u) / (z - u)
    else:
        raise DomainError(f"unknown massive observable {kind!r}")
    est, se = ratio_estimate(num, W)
    params = _params(spec, n_eigs=ctx.n_eigs, masses=list(ctx.masses), convention=ctx.convention.value,
                     kind=kind, z=z)
    if u is not None:
        params["u"] = [complex(u).real, complex(u).imag]
    return _report(f"massive_{kind}", params, S.size, est, se, target)


def _even(n_eigs):
    if n_eigs < 0 or n_eigs % 2:
        raise DomainError(f"n_eigs must be even and nonnegative, got {n_eigs}")
    return n_eigs // 2
