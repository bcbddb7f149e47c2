"""Eigenvalue weights h, g and numerical evaluation of the skew product.

Both models use the pair measure
    F(z1, z2) = h(x1) h(x2) sgn(x2 - x1) on R^2
              + 2i g(z1, z1*) delta^2(z2 - z1*) sgn(Im z1) on C,
so that for functions f, g

    <f|g> = R + C,
    R = int int_{x1 < x2} h(x1) h(x2) [f(x1) g(x2) - f(x2) g(x1)] dx1 dx2,
    C = 2i int_{Im z > 0} g(z, z*) [f(z) g(z*) - f(z*) g(z)] d^2 z.

With this convention <1|z> > 0.

Chiral weights (eta_pm = (1 +/- mu^2) / (4 mu^2)):
    h(x)      = 2 |x|^{nu/2} K_{nu/2}(eta_+ |x|) exp(eta_- x)
    g(z, z*)  = 2 |z|^nu exp(2 eta_- Re z) int_0^inf dt/t exp[-eta_+^2 t (z^2 + z*^2) - 1/(4t)]
                  K_{nu/2}(2 eta_+^2 t |z|^2) erfc(2 eta_+ sqrt(t) Im z)

Elliptic weights, for the normalisation of :func:`ensembles.sample_ginibre`:
    h(x)      = exp(-x^2 / (2(1 + tau)))
    g(z, z*)  = exp(-(z^2 + z*^2) / (2(1 + tau))) erfc(sqrt(2) Im z / sqrt(1 - tau^2))

Each weight is multiplied by the mass factor of its eigenvalue(s) when
flavours are present (see :class:`MassConvention`).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special as _sp

from .ensembles import EnsembleSpec, Model
from .errors import (
    DegenerateParameterError,
    DomainError,
    PoleProximityError,
    QuadratureError,
    SingularPointError,
)
from .specfun import bessel_k

__all__ = [
    "MassConvention",
    "WeightSpec",
    "QuadratureSpec",
    "Domain",
    "SkewRule",
    "weight_h",
    "weight_g",
    "ginibre_reduced_h",
    "ginibre_reduced_g",
    "integration_domain",
    "build_rule",
    "skew_product",
    "gram_matrix",
    "measure_F_split",
]


class MassConvention(str, Enum):
    """Sign of the squared mass in the flavour factor.

    ``PLUS``:  chiral prod(x + m^2),  elliptic prod(x^2 + m^2)
    ``MINUS``: chiral prod(m^2 - x),  elliptic prod(m^2 - x^2)
    """

    PLUS = "plus-m-squared"
    MINUS = "minus-m-squared"


@dataclass(frozen=True)
class WeightSpec:
    ensemble: EnsembleSpec
    includes_masses: bool = True
    mass_sign_convention: MassConvention = MassConvention.MINUS

    def __post_init__(self):
        object.__setattr__(self, "mass_sign_convention", MassConvention(self.mass_sign_convention))
        e = self.ensemble
        if e.model is Model.CHIRAL and not 0.0 < e.mu < 1.0:
            if e.mu == 1.0:
                raise DegenerateParameterError("chiral weights need mu < 1 (mu = 1 is maximal non-Hermiticity)")
            raise DomainError(f"mu must lie in (0, 1), got {e.mu!r}")

    @property
    def is_chiral(self) -> bool:
        return self.ensemble.model is Model.CHIRAL

    @property
    def masses(self) -> tuple:
        return self.ensemble.masses if self.includes_masses else ()

    def mass_factor(self, z):
        """Flavour factor of one eigenvalue z (real or complex)."""
        z = np.asarray(z)
        out = np.ones(z.shape, dtype=np.result_type(z, float))
        if not self.is_chiral:
            z = z * z
        for m in self.masses:
            if self.mass_sign_convention is MassConvention.PLUS:
                out = out * (z + m * m)
            else:
                out = out * (m * m - z)
        return out

    def insertion_points(self) -> np.ndarray:
        """Points a_l with mass_factor(z) = prod_l (a_l - z) up to an overall sign."""
        s = 1.0 if self.mass_sign_convention is MassConvention.MINUS else -1.0
        m2 = np.array([s * m * m for m in self.masses])
        if self.is_chiral:
            return m2.astype(float)
        r = np.sqrt(m2.astype(complex))
        return np.concatenate([r, -r])

    def quenched(self) -> "WeightSpec":
        return WeightSpec(self.ensemble.with_masses(()), False, self.mass_sign_convention)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation for the skew product.

    ``real_cutoff`` and ``radius`` truncate the real line to [-L, L] and the
    upper half plane to the half disc |z| <= R.  When left as None they are
    found by scanning the integrand until it drops below ``tail`` times its
    peak.  ``max_subdiv`` caps the number of quadrature-order refinements.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-9
    real_cutoff: float | None = None
    radius: float | None = None
    max_subdiv: int = 5
    inner_rel_tol: float = 1e-11
    tail: float = 1e-18

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.inner_rel_tol > 0):
            raise DomainError("tolerances must be positive")
        if self.max_subdiv < 1:
            raise DomainError("max_subdiv must be at least 1")


# ---------------------------------------------------------------- weights


def weight_h(w: WeightSpec, x):
    """Weight of a real eigenvalue."""
    xa = np.asarray(x, dtype=float)
    e = w.ensemble
    if w.is_chiral:
        if np.any(xa == 0):
            raise SingularPointError("chiral real weight is singular at x = 0")
        ax = np.abs(xa)
        k = bessel_k(e.nu / 2, ax * e.eta_plus, scaled=True)
        out = 2 * ax ** (e.nu / 2) * k * np.exp(e.eta_minus * xa - e.eta_plus * ax)
    else:
        out = np.exp(-xa * xa / (2 * (1 + e.tau)))
    out = out * w.mass_factor(xa)
    return out if np.ndim(x) else float(out)


def _ginibre_g(tau, z):
    x, y = z.real, z.imag
    a = math.sqrt(2.0) * y / math.sqrt(1 - tau * tau)
    return np.exp(-(x * x - y * y) / (1 + tau) - a * a) * _sp.erfcx(a)


def _chiral_inner(x, y, nu, ep, rtol, n0=32, max_level=8):
    """Saddle-centred trapezoid for the t-integral of the chiral weight.

    With B = 4 eta_+^2 |z|^2 the exponentials combine into exp(-B t - 1/(4t)),
    whose maximum sits at t* = 1/(4 eta_+ |z|).  Substituting t = t* e^a gives
    exp(-c cosh a), c = 2 eta_+ |z|, so the integrand is smooth and decays
    doubly exponentially in a.  Returns the integral times exp(c).
    """
    r = np.hypot(x, y)
    c = 2 * ep * r
    amax = np.arccosh(1 + 46.0 / c) + 0.5
    rho = np.sqrt(ep / r)

    def f(idx, a):
        cc = c[idx, None]
        return (
            np.exp(-cc * (np.cosh(a) - 1))
            * _sp.kve(nu / 2, 0.25 * cc * np.exp(a))
            * _sp.erfcx(y[idx, None] * rho[idx, None] * np.exp(0.5 * a))
        )

    all_idx = np.arange(r.size)
    u = np.linspace(-1.0, 1.0, n0 + 1)
    vals = f(all_idx, amax[:, None] * u)
    step = 2 * amax / n0
    T = step * (vals.sum(1) - 0.5 * (vals[:, 0] + vals[:, -1]))
    active = all_idx
    n = n0
    for _ in range(max_level):
        um = (np.arange(n) + 0.5) * (2.0 / n) - 1.0
        fm = f(active, amax[active, None] * um)
        Tn = 0.5 * T[active] + 0.5 * step[active] * fm.sum(1)
        done = np.abs(Tn - T[active]) <= rtol * np.abs(Tn)
        T[active] = Tn
        step[active] = 0.5 * step[active]
        active = active[~done]
        n *= 2
        if active.size == 0:
            return T
    raise QuadratureError(
        f"chiral t-integral did not converge at {active.size} point(s), e.g. z = {x[active[0]]}+{y[active[0]]}i"
    )


def _chiral_g(e: EnsembleSpec, z, rtol):
    x, y = z.real.ravel(), z.imag.ravel()
    ep, em = e.eta_plus, e.eta_minus
    r = np.hypot(x, y)
    inner = _chiral_inner(x, y, e.nu, ep, rtol)
    return (2 * r**e.nu * np.exp(2 * em * x - 2 * ep * r) * inner).reshape(z.shape)


def weight_g(w: WeightSpec, z, rtol: float = 1e-11):
    """Weight g(z, z*) of a complex-conjugate pair, Im z > 0."""
    za = np.asarray(z, dtype=complex)
    if np.any(~(za.imag > 0)):
        raise DomainError("weight_g needs Im z > 0")
    if w.is_chiral:
        out = _chiral_g(w.ensemble, za, rtol)
    else:
        out = _ginibre_g(w.ensemble.tau, za)
    mf = w.mass_factor(za)
    out = out * (mf * mf.conj()).real
    return out if np.ndim(z) else float(out)


def ginibre_reduced_h(tau: float, x, masses=()):
    """Elliptic real weight in the reduced variable w = x / sqrt(2(1 + tau)):
    exp(-w^2) prod(w^2 + m^2)."""
    x = np.asarray(x, dtype=float)
    out = np.exp(-x * x)
    for m in masses:
        out = out * (x * x + m * m)
    return out if np.ndim(out) else float(out)


def ginibre_reduced_g(tau: float, z, masses=()):
    """Elliptic pair weight in the reduced variable:
    exp(-w^2 - w*^2) erfc(|w - w*| / sqrt(1 - tau)) prod(w^2 + m^2)(w*^2 + m^2)."""
    z = np.asarray(z, dtype=complex)
    out = np.exp(-(z * z + (z * z).conj()).real) * _sp.erfc(np.abs(z - z.conj()) / math.sqrt(1 - tau))
    for m in masses:
        out = out * np.abs(z * z + m * m) ** 2
    return out if np.ndim(out) else float(out)


def measure_F_split(w: WeightSpec) -> dict:
    """Describe the two terms of the pair measure used by :func:`skew_product`."""
    model = w.ensemble.model.value
    return {
        "model": model,
        "terms": [
            {
                "name": "real-real",
                "support": "R x R",
                "density": "h(x1) h(x2) sgn(x2 - x1)",
                "reduction": "integral over x1 < x2 of h h [f(x1) g(x2) - f(x2) g(x1)]",
            },
            {
                "name": "complex-pair",
                "support": "upper half plane",
                "density": "2i g(z, z*) delta^2(z2 - z1*)",
                "reduction": "2i integral over Im z > 0 of g(z, z*) [f(z) g(z*) - f(z*) g(z)]",
            },
        ],
        "mass_sign_convention": w.mass_sign_convention.value,
        "quaternion_note": (
            "for the symplectic analogue the pair measure is supported on z2 = z1* only, "
            "F(z1, z2) = g(z1, z2) delta^2(z2 - z1*) (z1 - z1*); documentation only, not samplable here"
        ),
    }


# ---------------------------------------------------------------- quadrature


@dataclass(frozen=True)
class Domain:
    """Truncated integration region: real segment and complex box [cx_lo, cx_hi] x [0, cy_hi]."""

    real_lo: float
    real_hi: float
    cx_lo: float
    cx_hi: float
    cy_hi: float
    disc_radius: float | None = None

    def distance_to(self, kappa: complex) -> float:
        """Distance from kappa and kappa* to the truncated region."""
        k = complex(kappa)
        dr = math.hypot(max(self.real_lo - k.real, 0, k.real - self.real_hi), k.imag)
        out = dr
        for kk in (k, k.conjugate()):
            dx = max(self.cx_lo - kk.real, 0, kk.real - self.cx_hi)
            dy = max(-kk.imag, 0, kk.imag - self.cy_hi)
            out = min(out, math.hypot(dx, dy))
        return out


def _scan_extent(fun, scale, tail, n=400):
    """Largest |t| along a ray where fun(t) >= tail * peak, scanning out to 1e4 scale."""
    t = scale * np.geomspace(1e-3, 1e4, n)
    with np.errstate(all="ignore"):
        v = np.nan_to_num(np.abs(fun(t)))
    peak = v.max()
    if not peak > 0:
        return scale
    big = np.flatnonzero(v >= tail * peak)
    return float(t[min(big[-1] + 1, n - 1)])


def _scales(w: WeightSpec):
    e = w.ensemble
    if w.is_chiral:
        return 1.0, 2.0 * e.mu**2, 2.0, 2.0  # x>0 decay length, x<0 decay length, panel widths
    s = math.sqrt(1 + e.tau)
    return s, s, 0.5 * s, 0.5 * math.sqrt(1 - e.tau)


def integration_domain(w: WeightSpec, q: QuadratureSpec, degree: int = 8) -> Domain:
    """Truncated region for integrands of polynomial degree <= ``degree`` per argument."""
    if q.real_cutoff is not None or q.radius is not None:
        L = q.real_cutoff if q.real_cutoff is not None else q.radius
        R = q.radius if q.radius is not None else q.real_cutoff
        return Domain(-L, L, -R, R, R, disc_radius=R)
    sp, sn, _, _ = _scales(w)
    d = degree

    def hr(t):
        return weight_h(w, t) * (1 + np.abs(t)) ** d

    Lp = _scan_extent(hr, sp, q.tail)
    Ln = _scan_extent(lambda t: hr(-t), sn, q.tail)

    def gmag(z):
        return np.abs(weight_g(w, z)) * (1 + np.abs(z)) ** (2 * d)

    xs = np.linspace(-Ln, Lp, 41)
    xs = xs[xs != 0]
    ys = np.geomspace(1e-6, 1e4, 300) * max(sp, 1.0)
    Z = xs[:, None] + 1j * ys[None, :]
    with np.errstate(all="ignore"):
        V = np.nan_to_num(gmag(Z))
    peak = V.max()
    keep = V >= q.tail * peak
    rows = np.flatnonzero(keep.any(0))
    Y = float(ys[min(rows[-1] + 1, ys.size - 1)]) if rows.size else float(ys[0])
    cols = np.flatnonzero(keep.any(1))
    cx_lo = float(xs[max(cols[0] - 1, 0)]) if cols.size else -Ln
    cx_hi = float(xs[min(cols[-1] + 1, xs.size - 1)]) if cols.size else Lp
    return Domain(-Ln, Lp, min(cx_lo, -Ln), max(cx_hi, Lp), Y)


def _breaks(lo, hi, width, graded):
    """Panel breakpoints on [lo, hi] with a break at 0 and, if ``graded``,
    geometric refinement toward 0 (ratio 4, down to 1e-9)."""
    pts = {lo, hi}
    for side, end in ((1, hi), (-1, lo)):
        if side * end <= 0:
            continue
        pts.add(0.0)
        start = 0.0
        if graded:
            g = 1.0
            while g > 1e-9:
                if g < abs(end):
                    pts.add(side * g)
                g /= 4.0
            start = min(1.0, abs(end))
        n = max(1, int(math.ceil((abs(end) - start) / width)))
        pts.update(side * (start + (abs(end) - start) * np.arange(1, n) / n))
    return np.array(sorted(p for p in pts if lo <= p <= hi))


@functools.lru_cache(maxsize=64)
def _gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def _panel_rule(b, order):
    x, wt = _gauss_legendre(order)
    a, c = b[:-1, None], b[1:, None]
    nodes = 0.5 * (c - a) * x[None, :] + 0.5 * (c + a)
    weights = 0.5 * (c - a) * wt[None, :]
    return nodes, weights


@dataclass
class SkewRule:
    """Precomputed nodes and weight values for the skew product on a fixed domain.

    Real part: per-panel Gauss-Legendre nodes (``real_x``, ``real_w`` including
    h) with panel start offsets, and a collapsed triangle rule per panel for
    x1 < x2 inside the same panel.  Complex part: tensor nodes ``cz`` with
    ``cw`` including g.
    """

    real_x: np.ndarray
    real_w: np.ndarray
    panel_starts: np.ndarray
    tri_x1: np.ndarray
    tri_x2: np.ndarray
    tri_w: np.ndarray
    cz: np.ndarray
    cw: np.ndarray
    order: int = 0
    domain: Domain | None = None

    @property
    def n_nodes(self) -> int:
        return self.real_x.size + self.tri_x1.size + self.cz.size

    def gram(self, funcs) -> np.ndarray:
        """Matrix G_ij = <f_i|f_j> for ``funcs(points) -> array (m, len(points))``."""
        G = np.zeros((0, 0), dtype=complex)
        if self.real_x.size:
            F = np.asarray(funcs(self.real_x))
            M = np.add.reduceat(F * self.real_w, self.panel_starts, axis=1)
            before = np.cumsum(M, axis=1) - M
            R = before @ M.T
            A = np.asarray(funcs(self.tri_x1)) * self.tri_w
            R = R + A @ np.asarray(funcs(self.tri_x2)).T
            G = (R - R.T).astype(complex)
        if self.cz.size:
            A = np.asarray(funcs(self.cz))
            B = np.asarray(funcs(self.cz.conj()))
            C = 2j * (A * self.cw) @ B.T
            G = G + (C - C.T) if G.size else C - C.T
        return G


def _triangle_rule(b, order):
    u, wu = _gauss_legendre(order)
    u = 0.5 * (u + 1)
    wu = 0.5 * wu
    U, V = np.meshgrid(u, u, indexing="ij")
    WU, WV = np.meshgrid(wu, wu, indexing="ij")
    a, c = b[:-1, None, None], b[1:, None, None]
    x2 = a + (c - a) * U
    x1 = a + (x2 - a) * V
    W = WU * WV * (c - a) * (x2 - a)
    return x1.ravel(), x2.ravel(), W.ravel()


def build_rule(w: WeightSpec, q: QuadratureSpec, order: int, degree: int = 8, domain: Domain | None = None) -> SkewRule:
    """Nodes and weights for one quadrature order (cached for repeated use)."""
    if domain is None:
        domain = _cached_domain(w, q, degree)
    return _cached_rule(w, q, order, domain)


@functools.lru_cache(maxsize=32)
def _cached_domain(w, q, degree):
    return integration_domain(w, q, degree)


@functools.lru_cache(maxsize=12)
def _cached_rule(w: WeightSpec, q: QuadratureSpec, order: int, dom: Domain) -> SkewRule:
    graded = w.is_chiral
    _, _, wx, wy = _scales(w)
    # real line
    bx = _breaks(dom.real_lo, dom.real_hi, wx, graded)
    xr, wr = _panel_rule(bx, order)
    hv = weight_h(w, xr) * wr
    real_x = xr.ravel()
    real_w = hv.ravel()
    panel_starts = np.arange(0, real_x.size, order)
    t1, t2, tw = _triangle_rule(bx, order)
    tri_w = tw * weight_h(w, t1) * weight_h(w, t2)
    # complex box, panels culled where the weight is negligible
    cbx = _breaks(dom.cx_lo, dom.cx_hi, wx, graded)
    cby = _breaks(0.0, dom.cy_hi, wy, graded)
    cx = 0.5 * (cbx[:-1] + cbx[1:])
    cy = 0.5 * (cby[:-1] + cby[1:])
    corners = (cbx[:, None] + 1j * np.maximum(cby, 1e-12)[None, :]).ravel()
    with np.errstate(all="ignore"):
        gc = np.nan_to_num(np.abs(weight_g(w, corners, q.inner_rel_tol))).reshape(cbx.size, cby.size)
        gm = np.nan_to_num(np.abs(weight_g(w, cx[:, None] + 1j * cy[None, :], q.inner_rel_tol)))
    pmax = np.maximum.reduce([gc[:-1, :-1], gc[1:, :-1], gc[:-1, 1:], gc[1:, 1:], gm])
    keep = pmax >= q.tail * 1e-6 * pmax.max()
    if dom.disc_radius is not None:
        near = np.hypot(np.minimum(np.abs(cbx[:-1]), np.abs(cbx[1:]))[:, None], cby[:-1][None, :])
        keep &= near < dom.disc_radius
    nx, wxn = _panel_rule(cbx, order)
    ny, wyn = _panel_rule(cby, order)
    ix, iy = np.nonzero(keep)
    X = nx[ix][:, :, None] + 0 * ny[iy][:, None, :]
    Y = ny[iy][:, None, :] + 0 * nx[ix][:, :, None]
    W = wxn[ix][:, :, None] * wyn[iy][:, None, :]
    cz = (X + 1j * Y).ravel()
    cw = W.ravel()
    if dom.disc_radius is not None:
        inside = np.abs(cz) <= dom.disc_radius
        cz, cw = cz[inside], cw[inside]
    cw = cw * weight_g(w, cz, q.inner_rel_tol)
    return SkewRule(real_x, real_w, panel_starts, t1, t2, tri_w, cz, cw, order, dom)


ORDERS = (10, 14, 20, 28, 40, 56)


def _refine(compute, q: QuadratureSpec, scale_fn, what):
    prev = None
    for order in ORDERS[: max(q.max_subdiv, 2)]:
        cur = compute(order)
        if prev is not None:
            err = np.abs(cur - prev)
            if np.all(err <= np.maximum(q.abs_tol, q.rel_tol * scale_fn(cur))):
                return cur
        prev = cur
    raise QuadratureError(
        f"{what} did not reach rel_tol={q.rel_tol:g} / abs_tol={q.abs_tol:g} after {q.max_subdiv} refinements "
        f"(last change {np.max(err):.3e})"
    )


def _check_poles(domain: Domain, poles, margin):
    for k in poles:
        if domain.distance_to(k) < margin:
            raise PoleProximityError(f"singularity at {k} lies within {margin:g} of the integration region")


def skew_product(f, g, w: WeightSpec, q: QuadratureSpec | None = None, degree: int = 8,
                 domain: Domain | None = None):
    """<f|g> for vectorised callables f, g.

    ``degree`` bounds the polynomial growth of f and g; it only steers the
    automatic truncation.  The quadrature order is raised until two
    consecutive orders agree within max(abs_tol, rel_tol |value|).
    """
    q = q or QuadratureSpec()

    def funcs(p):
        return np.stack([np.broadcast_to(f(p), p.shape), np.broadcast_to(g(p), p.shape)])

    def compute(order):
        return build_rule(w, q, order, degree, domain).gram(funcs)[0, 1]

    return complex(_refine(compute, q, np.abs, "skew product"))


def gram_matrix(funcs, w: WeightSpec, q: QuadratureSpec | None = None, degree: int = 8,
                domain: Domain | None = None) -> np.ndarray:
    """G_ij = <f_i|f_j> with ``funcs(points) -> (m, len(points))``.

    Convergence is judged entrywise relative to sqrt(s_i s_j), where s_i is
    the largest |G_ij| in row i.
    """
    q = q or QuadratureSpec()

    def compute(order):
        return build_rule(w, q, order, degree, domain).gram(funcs)

    def scale(G):
        s = np.abs(G).max(axis=1)
        return np.sqrt(np.outer(s, s))

    return _refine(compute, q, scale, "Gram matrix")
