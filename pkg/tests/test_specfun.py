import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from skewspec.errors import DegenerateParameterError, DomainError
from skewspec.specfun import (
    PolyParams,
    bessel_k,
    c_poly,
    c_poly_all,
    c_poly_coeffs,
    erfc,
    erfcx,
    hermite,
    hermite_coeffs,
    laguerre,
    laguerre_coeffs,
)


def _horner(coeffs, z):
    out = 0
    for a in reversed(coeffs):
        out = out * z + a
    return out


def _deriv(coeffs, times):
    c = list(coeffs)
    for _ in range(times):
        c = [k * c[k] for k in range(1, len(c))]
    return c


class TestHermite:
    def test_small_values(self):
        assert hermite(0, 3.7 + 1j) == 1
        assert hermite(1, 2) == 4
        assert hermite(3, 1) == -4

    def test_complex_argument(self):
        z = 0.3 - 1.2j
        assert abs(hermite(3, z) - (8 * z**3 - 12 * z)) < 1e-13

    @pytest.mark.parametrize("n", range(11))
    def test_recurrence_matches_exact_coefficients(self, n):
        z = np.array([-1.7, 0.2, 1.3 + 0.4j])
        want = np.array([_horner(hermite_coeffs(n), complex(x)) for x in z])
        np.testing.assert_allclose(hermite(n, z), want, rtol=1e-12)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_derivative_identity(self, n):
        # d^{n-1} H_n / dz^{n-1} = 2^n n! z
        assert _deriv(hermite_coeffs(n), n - 1) == [0, 2**n * math.factorial(n)]

    @pytest.mark.parametrize("N", range(1, 9))
    @pytest.mark.parametrize("alpha", [0.5, 2.0])
    def test_large_argument_limit(self, N, alpha):
        u = 1e6
        assert hermite(N, u / alpha) / u**N == pytest.approx((2 / alpha) ** N, rel=1e-4)


class TestLaguerre:
    def test_small_values(self):
        assert laguerre(0, 3, 2.5) == 1
        assert laguerre(1, 2, 1) == 2
        assert laguerre(2, 0, 2) == -1

    @pytest.mark.parametrize("n", range(11))
    @pytest.mark.parametrize("nu", [0, 1, 3])
    def test_recurrence_matches_exact_coefficients(self, n, nu):
        z = np.array([0.1, 2.2, 7.5, -1 + 1j])
        want = np.array([complex(_horner([complex(c) for c in laguerre_coeffs(n, nu)], complex(x))) for x in z])
        np.testing.assert_allclose(laguerre(n, nu, z), want, rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("n", range(1, 9))
    @pytest.mark.parametrize("nu", [0, 2])
    def test_derivative_identity(self, n, nu):
        # d^{n-1} L_n / dz^{n-1} = (-1)^n (z - (n + nu))
        got = _deriv(laguerre_coeffs(n, nu), n - 1)
        assert got == [(-1) ** n * -(n + nu), (-1) ** n]

    @pytest.mark.parametrize("N", range(1, 9))
    def test_large_argument_limit(self, N):
        alpha, u = 0.7, 1e6
        want = (-1) ** N / (math.factorial(N) * alpha**N)
        assert laguerre(N, 1, u / alpha) / u**N == pytest.approx(want, rel=1e-4)

    def test_coefficients_are_exact(self):
        assert laguerre_coeffs(2, 1) == [3, -3, Fraction(1, 2)]


class TestBessel:
    def test_half_order_closed_form(self):
        assert bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1), rel=1e-14)
        assert bessel_k(0.5, 4.0) == pytest.approx(math.sqrt(math.pi / 8) * math.exp(-4), rel=1e-14)

    def test_integer_order_asymptotic(self):
        x = 50.0
        assert bessel_k(0, x) == pytest.approx(math.sqrt(math.pi / (2 * x)) * math.exp(-x), rel=1e-2)
        assert bessel_k(0, x) == pytest.approx(float(mpmath.besselk(0, x)), rel=1e-12)

    @pytest.mark.parametrize("order", [0, 0.5, 1, 1.5, 2, 2.5, 3])
    @pytest.mark.parametrize("x", [0.01, 0.3, 1.9, 2.1, 8.0, 40.0])
    def test_against_mpmath(self, order, x):
        want = float(mpmath.besselk(order, x))
        assert bessel_k(order, x) == pytest.approx(want, rel=1e-12)

    def test_scaled(self):
        x = 30.0
        assert bessel_k(1, x, scaled=True) == pytest.approx(float(mpmath.besselk(1, x) * mpmath.exp(x)), rel=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            bessel_k(0.5, x)


class TestErfc:
    def test_limits(self):
        assert erfc(0.0) == 1.0
        assert erfc(np.inf) == 0.0

    @given(st.floats(-10, 10))
    @settings(max_examples=60, deadline=None)
    def test_against_mpmath(self, x):
        mpmath.mp.dps = 30
        want = float(mpmath.erfc(x))
        assert erfc(x) == pytest.approx(want, rel=1e-14, abs=1e-300)

    def test_erfcx(self):
        assert erfcx(20.0) == pytest.approx(float(mpmath.erfc(20) * mpmath.exp(400)), rel=1e-13)


class TestCPoly:
    def test_examples(self):
        assert c_poly(PolyParams.hermite(0.5), 2, 1.0) == pytest.approx(0.5)
        assert c_poly(PolyParams.hermite(1.0), 3, 2.0) == pytest.approx(2.0)
        assert c_poly(PolyParams.laguerre(1, 0.5), 0, 1.3) == 1

    @pytest.mark.parametrize(
        "params",
        [PolyParams.hermite(t) for t in (0.1, 0.5, 0.9)]
        + [PolyParams.laguerre(nu, mu) for nu in (0, 1, 2, 3) for mu in (0.1, 0.5, 0.9)],
    )
    def test_monic(self, params):
        for k in range(21):
            c = c_poly_coeffs(params, k)
            assert len(c) == k + 1
            # Laguerre C_k carries (-1)^k in front of z^k
            want = 1 if params.family.value == "hermite" else (-1) ** k
            assert c[-1] == want

    def test_all_matches_single(self):
        p = PolyParams.laguerre(2, 0.4)
        z = np.array([0.2, 1.5 + 0.3j])
        table = c_poly_all(p, 6, z)
        for k in range(7):
            np.testing.assert_allclose(table[k], c_poly(p, k, z), rtol=1e-13)

    def test_laguerre_scaled(self):
        mu, nu, k, z = 0.6, 1, 3, 0.8
        s = 1 - mu**2
        want = s**k * math.factorial(k) * laguerre(k, nu, z / s)
        assert c_poly(PolyParams.laguerre(nu, mu), k, z) == pytest.approx(want, rel=1e-13)

    def test_degenerate_mu(self):
        p = PolyParams.laguerre(0, 1.0)
        with pytest.raises(DegenerateParameterError):
            c_poly(p, 1, 0.5)
        with pytest.raises(DegenerateParameterError):
            c_poly_coeffs(p, 2)
