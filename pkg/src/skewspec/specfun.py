"""Classical special functions and the rescaled polynomial families C_k.

Polynomials are evaluated by forward three-term recurrence in floating point
(any complex argument, scalar or array).  Exact coefficient vectors are built
by the same recurrences on :class:`fractions.Fraction` vectors; those are what
monicity and derivative-identity checks are run against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np
from scipy import special as _sp

from .errors import DegenerateParameterError, DomainError

__all__ = [
    "Family",
    "PolyParams",
    "hermite",
    "laguerre",
    "hermite_coeffs",
    "laguerre_coeffs",
    "bessel_k",
    "erfc",
    "erfcx",
    "c_poly",
    "c_poly_all",
    "c_poly_coeffs",
]


class Family(str, Enum):
    HERMITE = "hermite"
    LAGUERRE = "laguerre"


@dataclass(frozen=True)
class PolyParams:
    """Parameters of a rescaled polynomial family.

    ``param`` is tau for Hermite and mu for Laguerre.  ``scale`` is the
    argument scale: sqrt(2 tau) for Hermite, 1 - mu**2 for Laguerre.
    """

    family: Family
    param: float
    nu: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.nu < 0 or int(self.nu) != self.nu:
            raise DomainError(f"nu must be a nonnegative integer, got {self.nu!r}")
        if self.family is Family.HERMITE:
            if not 0.0 <= self.param <= 1.0:
                raise DomainError(f"tau must lie in [0, 1], got {self.param!r}")
        else:
            if not 0.0 < self.param <= 1.0:
                raise DomainError(f"mu must lie in (0, 1], got {self.param!r}")

    @classmethod
    def hermite(cls, tau: float) -> "PolyParams":
        return cls(Family.HERMITE, float(tau), 0)

    @classmethod
    def laguerre(cls, nu: int, mu: float) -> "PolyParams":
        return cls(Family.LAGUERRE, float(mu), int(nu))

    @property
    def scale(self) -> float:
        if self.family is Family.HERMITE:
            return math.sqrt(2.0 * self.param)
        return 1.0 - self.param**2

    def _check_nondegenerate(self):
        if self.family is Family.LAGUERRE and self.scale <= 0.0:
            raise DegenerateParameterError(
                "Laguerre family is degenerate at mu = 1 (1 - mu^2 = 0); "
                "maximal non-Hermiticity is not supported"
            )


def _as_array(z):
    return np.asarray(z) if not np.isscalar(z) else z


def hermite(n: int, z):
    """Physicists' Hermite polynomial H_n(z) by forward recurrence."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    z = _as_array(z)
    h_prev, h = 0 * z + 1, 2 * z
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2 * z * h - 2 * k * h_prev
    return h


def laguerre(n: int, nu: int, z):
    """Generalized Laguerre polynomial L_n^nu(z) by forward recurrence."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    z = _as_array(z)
    l_prev, l = 0 * z + 1, nu + 1 - z
    if n == 0:
        return l_prev
    for k in range(1, n):
        l_prev, l = l, ((2 * k + nu + 1 - z) * l - (k + nu) * l_prev) / (k + 1)
    return l


def _poly_recurrence(n, a0, step):
    """Run ``p_{k+1} = step(k, p_k, p_{k-1})`` on coefficient lists."""
    polys = [a0]
    for k in range(n):
        prev = polys[k - 1] if k >= 1 else [0]
        polys.append(step(k, polys[k], prev))
    return polys


def _shift(c):
    return [0] + list(c)


def _axpy(a, x, b, y):
    m = max(len(x), len(y))
    x = list(x) + [0] * (m - len(x))
    y = list(y) + [0] * (m - len(y))
    return [a * u + b * v for u, v in zip(x, y)]


def hermite_coeffs(n: int) -> list[int]:
    """Integer coefficients of H_n, ascending powers."""

    def step(k, p, q):
        return _axpy(2, _shift(p), -2 * k, q)

    return _poly_recurrence(n, [1], step)[n][: n + 1]


def laguerre_coeffs(n: int, nu: int) -> list[Fraction]:
    """Exact rational coefficients of L_n^nu, ascending powers."""

    def step(k, p, q):
        num = _axpy(Fraction(2 * k + nu + 1), p, -1, _shift(p))
        num = _axpy(1, num, -(k + nu), q) if k >= 1 else num
        return [c / (k + 1) for c in num]

    return _poly_recurrence(n, [Fraction(1)], step)[n][: n + 1]


def bessel_k(order, x, scaled: bool = False):
    """Modified Bessel function of the second kind K_order(x), x > 0.

    Half-odd orders use the terminating closed form
    K_{k+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_j (k+j)!/(j!(k-j)!) (2x)^{-j}.
    Integer orders are delegated to ``scipy.special.kv``.  With ``scaled``
    the factor e^{x} is included (useful for large arguments).
    """
    two_order = 2 * Fraction(order).limit_denominator(2)
    if two_order < 0 or two_order.denominator != 1 or 2 * Fraction(order) != two_order:
        raise DomainError(f"order must be a nonnegative half-integer, got {order!r}")
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)):
        raise DomainError("bessel_k requires x > 0")
    two_order = int(two_order)
    if two_order % 2 == 1:
        k = (two_order - 1) // 2
        s = np.zeros_like(xa)
        for j in range(k + 1):
            s = s + math.factorial(k + j) / (math.factorial(j) * math.factorial(k - j)) * (2 * xa) ** (-j)
        out = np.sqrt(np.pi / (2 * xa)) * s
        if not scaled:
            out = out * np.exp(-xa)
    else:
        out = (_sp.kve if scaled else _sp.kv)(two_order // 2, xa)
    return out if np.ndim(x) else float(out)


def erfc(x):
    """Complementary error function (scipy.special.erfc)."""
    out = _sp.erfc(x)
    return out if np.ndim(x) else float(out)


def erfcx(x):
    """Scaled complementary error function exp(x^2) erfc(x)."""
    out = _sp.erfcx(x)
    return out if np.ndim(x) else float(out)


def c_poly_all(params: PolyParams, kmax: int, z):
    """Return [C_0(z), ..., C_kmax(z)] stacked along a new leading axis.

    Recurrences used (valid down to tau = 0):
      Hermite:  C_{k+1} = z C_k - k tau C_{k-1}
      Laguerre: C_{k+1} = ((2k+nu+1) a - z) C_k - k (k+nu) a^2 C_{k-1},  a = 1 - mu^2
    """
    params._check_nondegenerate()
    z = np.asarray(z)
    out = np.empty((kmax + 1,) + z.shape, dtype=np.result_type(z, float))
    out[0] = 1
    if kmax == 0:
        return out
    if params.family is Family.HERMITE:
        tau = params.param
        out[1] = z
        for k in range(1, kmax):
            out[k + 1] = z * out[k] - k * tau * out[k - 1]
    else:
        a, nu = params.scale, params.nu
        out[1] = (nu + 1) * a - z
        for k in range(1, kmax):
            out[k + 1] = ((2 * k + nu + 1) * a - z) * out[k] - k * (k + nu) * a * a * out[k - 1]
    return out


def c_poly(params: PolyParams, k: int, z):
    """C_k(z): (tau/2)^{k/2} H_k(z/sqrt(2 tau)) or a^k k! L_k^nu(z/a), a = 1 - mu^2.

    The Hermite family is monic; the Laguerre one has leading coefficient (-1)^k.
    """
    if k < 0:
        raise DomainError("degree must be nonnegative")
    val = c_poly_all(params, k, z)[k]
    return val if np.ndim(z) else val[()]


def _exact_param(params: PolyParams) -> Fraction:
    if params.family is Family.HERMITE:
        return Fraction(params.param)
    return 1 - Fraction(params.param) ** 2


def c_poly_coeffs(params: PolyParams, k: int) -> list[Fraction]:
    """Exact coefficients of C_k (ascending), with tau or mu read as exact binary rationals."""
    params._check_nondegenerate()
    p = _exact_param(params)
    if params.family is Family.HERMITE:

        def step(j, c, prev):
            return _axpy(1, _shift(c), -j * p, prev)

        return _poly_recurrence(k, [Fraction(1)], step)[k][: k + 1]
    nu = params.nu

    def step(j, c, prev):
        out = _axpy((2 * j + nu + 1) * p, c, -1, _shift(c))
        return _axpy(1, out, -j * (j + nu) * p * p, prev)

    return _poly_recurrence(k, [Fraction(1)], step)[k][: k + 1]
