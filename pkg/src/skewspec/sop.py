"""Skew-orthogonal polynomials of the two models, their norms and kernels.

Elliptic (Hermite) family, with C_k(z) = (tau/2)^{k/2} H_k(z / sqrt(2 tau)):
    q_{2k}   = C_{2k}
    q_{2k+1} = C_{2k+1} - 2k C_{2k-1} + c C_{2k}
    h_k      = 2 (1 + tau) sqrt(2 pi) (2k)!

Chiral (Laguerre) family, with C_k(z) = a^k k! L_k^nu(z / a), a = 1 - mu^2:
    q_{2k}   = C_{2k}
    q_{2k+1} = -C_{2k+1} + (1 + mu^2)^2 (2k) (2k + nu) C_{2k-1} + c' C_{2k},
               c' = c + a ((2k + 1)^2 + (2k + 1) nu)
    h_k      = 8 pi (4 mu^2) (2k)! (2k + nu)! (1 + mu^2)^{4k + nu + 1}

All q_n are monic and q_1 = z + c.  Kernels use
    K_{2N}(z1, z2) = sum_{k<N} [q_{2k+1}(z1) q_{2k}(z2) - q_{2k+1}(z2) q_{2k}(z1)] / h_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .ensembles import EnsembleSpec, Model
from .errors import DomainError, PoleProximityError
from .specfun import Family, PolyParams, c_poly_all, c_poly_coeffs, hermite, laguerre
from .weights import (
    Domain,
    QuadratureSpec,
    WeightSpec,
    integration_domain,
    skew_product,
)

__all__ = [
    "SkewPolyFamily",
    "q_hermite",
    "q_laguerre",
    "norm_h",
    "kernel_sum",
    "expect_two_dets",
    "cauchy_transform",
    "poly_eval",
]


def poly_eval(coeffs, z):
    """Evaluate ascending coefficients at z by Horner's rule."""
    z = np.asarray(z)
    out = np.zeros(z.shape, dtype=np.result_type(z, float))
    for a in reversed(coeffs):
        out = out * z + float(a)
    return out if np.ndim(out) else out[()]


@dataclass(frozen=True)
class SkewPolyFamily:
    """Monic skew-orthogonal family q_k with free odd-polynomial constant ``c``."""

    params: PolyParams
    c: float = 0.0

    @classmethod
    def hermite(cls, tau: float, c: float = 0.0) -> "SkewPolyFamily":
        return cls(PolyParams.hermite(tau), float(c))

    @classmethod
    def laguerre(cls, nu: int, mu: float, c: float = 0.0) -> "SkewPolyFamily":
        fam = cls(PolyParams.laguerre(nu, mu), float(c))
        fam.params._check_nondegenerate()
        return fam

    @classmethod
    def from_ensemble(cls, spec: EnsembleSpec, c: float = 0.0) -> "SkewPolyFamily":
        if spec.model is Model.CHIRAL:
            return cls.laguerre(spec.nu, spec.mu, c)
        return cls.hermite(spec.tau, c)

    def with_c(self, c: float) -> "SkewPolyFamily":
        return SkewPolyFamily(self.params, float(c))

    @property
    def is_hermite(self) -> bool:
        return self.params.family is Family.HERMITE

    def ensemble(self, n: int = 0, masses=()) -> EnsembleSpec:
        p = self.params
        if self.is_hermite:
            return EnsembleSpec.ginibre(n, p.param, masses)
        return EnsembleSpec.chiral(n, p.nu, p.param, masses)

    def weight(self) -> WeightSpec:
        return WeightSpec(self.ensemble())

    # ------------------------------------------------------------ evaluation

    def _odd_coeffs(self, k):
        """(alpha, beta, gamma) with q_{2k+1} = alpha C_{2k+1} + beta C_{2k-1} + gamma C_{2k}."""
        p = self.params
        if self.is_hermite:
            return 1.0, -2.0 * k, self.c
        mu2 = p.param**2
        a = 1 - mu2
        cprime = self.c + a * ((2 * k + 1) ** 2 + (2 * k + 1) * p.nu)
        return -1.0, (1 + mu2) ** 2 * (2 * k) * (2 * k + p.nu), cprime

    def q_all(self, kmax: int, z) -> np.ndarray:
        """Stack [q_0(z), ..., q_kmax(z)] along a new leading axis."""
        C = c_poly_all(self.params, kmax, z)
        out = np.empty_like(C)
        for n in range(kmax + 1):
            if n % 2 == 0:
                out[n] = C[n]
            else:
                k = n // 2
                al, be, ga = self._odd_coeffs(k)
                out[n] = al * C[n] + ga * C[n - 1]
                if k >= 1:
                    out[n] = out[n] + be * C[n - 2]
        return out

    def q(self, n: int, z):
        if n < 0:
            raise DomainError("degree must be nonnegative")
        val = self.q_all(n, z)[n]
        return val if np.ndim(z) else val[()]

    def coeffs(self, n: int) -> list[Fraction]:
        """Exact ascending coefficients of q_n (parameters read as exact binary rationals)."""
        if n % 2 == 0:
            return c_poly_coeffs(self.params, n)
        k = n // 2
        p = self.params
        c = Fraction(self.c)
        if self.is_hermite:
            al, be, ga = Fraction(1), Fraction(-2 * k), c
        else:
            mu2 = Fraction(p.param) ** 2
            al = Fraction(-1)
            be = (1 + mu2) ** 2 * (2 * k) * (2 * k + p.nu)
            ga = c + (1 - mu2) * ((2 * k + 1) ** 2 + (2 * k + 1) * p.nu)
        out = [al * v for v in c_poly_coeffs(self.params, n)]
        for j, v in enumerate(c_poly_coeffs(self.params, n - 1)):
            out[j] += ga * v
        if k >= 1:
            for j, v in enumerate(c_poly_coeffs(self.params, n - 2)):
                out[j] += be * v
        return out

    # ------------------------------------------------------------ norms and kernels

    def norm(self, k: int) -> float:
        if k < 0:
            raise DomainError("norm index must be nonnegative")
        p = self.params
        if self.is_hermite:
            return 2 * (1 + p.param) * math.sqrt(2 * math.pi) * math.factorial(2 * k)
        mu2 = p.param**2
        return (
            8 * math.pi * 4 * mu2 * math.factorial(2 * k) * math.factorial(2 * k + p.nu)
            * (1 + mu2) ** (4 * k + p.nu + 1)
        )

    def norm_ratio_exact(self, n: int, k: int) -> Fraction:
        """h_n / h_k as an exact rational."""
        p = self.params
        r = Fraction(math.factorial(2 * n), math.factorial(2 * k))
        if self.is_hermite:
            return r
        mu2 = Fraction(p.param) ** 2
        return r * Fraction(math.factorial(2 * n + p.nu), math.factorial(2 * k + p.nu)) * (1 + mu2) ** (4 * (n - k))

    def kernel(self, n_eigs: int, z1, z2):
        """K_{n_eigs}(z1, z2) for an even number of eigenvalues."""
        N = _half(n_eigs)
        if N == 0:
            return np.zeros(np.broadcast(np.asarray(z1), np.asarray(z2)).shape)[()]
        Q1 = self.q_all(2 * N - 1, z1)
        Q2 = self.q_all(2 * N - 1, z2)
        out = 0
        for k in range(N):
            out = out + (Q1[2 * k + 1] * Q2[2 * k] - Q2[2 * k + 1] * Q1[2 * k]) / self.norm(k)
        return out

    def kernel_coeffs(self, n_eigs: int) -> list[list[Fraction]]:
        """Exact coefficients of h_{N-1} K_{2N}(z1, z2): entry [i][j] multiplies z1^i z2^j."""
        N = _half(n_eigs)
        size = 2 * N
        out = [[Fraction(0)] * size for _ in range(size)]
        for k in range(N):
            r = self.norm_ratio_exact(N - 1, k)
            odd = self.coeffs(2 * k + 1)
            even = self.coeffs(2 * k)
            for i, a in enumerate(odd):
                for j, b in enumerate(even):
                    out[i][j] += r * a * b
                    out[j][i] -= r * a * b
        return out

    def expect_two_dets(self, n: int, z, u):
        """Closed-form <det(z - M) det(u - M)> over n x n matrices M (J or A B^T)."""
        if n < 0:
            raise DomainError("matrix size must be nonnegative")
        z = np.asarray(z)
        u = np.asarray(u)
        p = self.params
        total = 0
        if self.is_hermite:
            tau = p.param
            if tau == 0:
                # only the k = l terms with tau^l H_k H_k / (2^k k!) survive: z^l u^l / l!
                for l in range(n + 1):
                    total = total + (z * u) ** l / math.factorial(l)
                out = math.factorial(n) * total
            else:
                s = math.sqrt(2 * tau)
                inner = 0
                for l in range(n + 1):
                    inner = inner + hermite(l, z / s) * hermite(l, u / s) / (math.factorial(l) * 2**l)
                    total = total + tau**l * inner
                out = math.factorial(n) * total
        else:
            nu, mu2 = p.nu, p.param**2
            a = 1 - mu2
            r2 = ((1 - mu2) / (1 + mu2)) ** 2
            inner = 0
            for l in range(n + 1):
                inner = inner + math.factorial(l) / math.factorial(l + nu) * laguerre(l, nu, z / a) * laguerre(l, nu, u / a)
                total = total + r2**l * inner
            out = math.factorial(n) * math.factorial(n + nu) * (1 + mu2) ** (2 * n) * total
        return out if np.ndim(out) else out[()]


def _half(n_eigs):
    if n_eigs < 0 or n_eigs % 2:
        raise DomainError(f"only an even number of eigenvalues is supported, got {n_eigs}")
    return n_eigs // 2


# ---------------------------------------------------------------- function-style API


def q_hermite(k: int, tau: float, c: float, z):
    return SkewPolyFamily.hermite(tau, c).q(k, z)


def q_laguerre(k: int, nu: int, mu: float, c: float, z):
    return SkewPolyFamily.laguerre(nu, mu, c).q(k, z)


def norm_h(family: SkewPolyFamily, k: int) -> float:
    return family.norm(k)


def kernel_sum(family: SkewPolyFamily, n_eigs: int, z1, z2):
    return family.kernel(n_eigs, z1, z2)


def expect_two_dets(family: SkewPolyFamily, n_eigs: int, z, u):
    return family.expect_two_dets(n_eigs, z, u)


def cauchy_domain(family: SkewPolyFamily, n: int, kappa: complex, q: QuadratureSpec,
                  margin: float = 0.25, tail: float = 1e-11) -> Domain:
    """Truncated region for t_n(kappa) that keeps kappa and kappa* at a distance.

    The region must stay ``margin * |kappa|`` away from kappa.  If the automatic
    region is closer, one side of the complex box (top, right or left, in that
    order) and, if needed, the real segment is cut back; a cut is accepted only
    where the weight times |z|^{2(n+1)} is below ``tail`` of its peak.
    """
    w = family.weight()
    dom = integration_domain(w, q, n + 1)
    kappa = complex(kappa)
    d = margin * abs(kappa)
    if dom.distance_to(kappa) >= d:
        return dom
    loose = integration_domain(w, QuadratureSpec(tail=tail), n + 1)
    x, y = kappa.real, abs(kappa.imag)
    lo, hi = dom.real_lo, dom.real_hi
    if y < d:
        # the pole projects onto the real segment: cut it on the side of kappa
        reach = math.sqrt(d * d - y * y)
        if x > 0 and loose.real_hi <= x - reach:
            hi = min(hi, x - reach)
        elif x < 0 and loose.real_lo >= x + reach:
            lo = max(lo, x + reach)
        else:
            raise PoleProximityError(f"kappa = {kappa} is too close to the real eigenvalue support")
    options = [
        (loose.cy_hi <= y - d, dict(cy_hi=min(dom.cy_hi, y - d))),
        (x > 0 and loose.cx_hi <= x - d, dict(cx_hi=min(dom.cx_hi, x - d))),
        (x < 0 and loose.cx_lo >= x + d, dict(cx_lo=max(dom.cx_lo, x + d))),
    ]
    for ok, cut in options:
        if ok:
            box = dict(cx_lo=dom.cx_lo, cx_hi=dom.cx_hi, cy_hi=dom.cy_hi)
            box.update(cut)
            return Domain(lo, hi, box["cx_lo"], box["cx_hi"], box["cy_hi"])
    raise PoleProximityError(
        f"kappa = {kappa} is too close to the complex eigenvalue support "
        f"(weight extends to Re z in [{loose.cx_lo:.3g}, {loose.cx_hi:.3g}], Im z <= {loose.cy_hi:.3g})"
    )


def cauchy_transform(family: SkewPolyFamily, n: int, kappa: complex, q: QuadratureSpec | None = None):
    """t_n(kappa) = <q_n | 1/(kappa - z)> by quadrature."""
    q = q or QuadratureSpec()
    kappa = complex(kappa)
    dom = cauchy_domain(family, n, kappa, q)
    return skew_product(
        lambda z: family.q(n, z),
        lambda z: 1.0 / (kappa - z),
        family.weight(),
        q,
        degree=n + 1,
        domain=dom,
    )
