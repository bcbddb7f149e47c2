import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from skewspec.errors import DegenerateParameterError, DomainError, PoleProximityError
from skewspec.sop import SkewPolyFamily, cauchy_transform, expect_two_dets, kernel_sum, norm_h, q_hermite, q_laguerre

FAMILIES = [
    SkewPolyFamily.hermite(0.1, c=0.3),
    SkewPolyFamily.hermite(0.5, c=-1.25),
    SkewPolyFamily.laguerre(0, 0.3, c=0.5),
    SkewPolyFamily.laguerre(2, 0.7, c=-0.75),
]
IDS = ["H0.1", "H0.5", "L0-0.3", "L2-0.7"]


class TestPolynomials:
    def test_low_order(self):
        H = SkewPolyFamily.hermite(0.5, c=0.4)
        assert H.q(0, 2.3) == 1
        assert H.q(1, 2.3) == pytest.approx(2.7)
        assert H.q(2, 2.0) == pytest.approx(3.5)
        assert SkewPolyFamily.hermite(1.0).q(3, 1.0) == pytest.approx(-4.0)
        L = SkewPolyFamily.laguerre(1, 0.6, c=0.4)
        assert L.q(0, 0.9) == 1
        assert L.q(1, 0.9) == pytest.approx(1.3)

    def test_laguerre_q2(self):
        L = SkewPolyFamily.laguerre(0, math.sqrt(0.5))
        assert L.q(2, 0.0) == pytest.approx(0.5)
        nu, mu = 2, 0.4
        a = 1 - mu**2
        z = 1.7
        want = z**2 - 2 * (nu + 2) * a * z + (nu + 1) * (nu + 2) * a**2
        assert SkewPolyFamily.laguerre(nu, mu).q(2, z) == pytest.approx(want)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_monic_exact(self, fam):
        for n in range(13):
            c = fam.coeffs(n)
            assert len(c) == n + 1
            assert c[-1] == 1
            assert all(isinstance(v, Fraction) for v in c)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_evaluator_matches_coefficients(self, fam):
        z = np.array([0.3, -1.1 + 0.4j, 2.0])
        for n in range(10):
            c = [float(v) for v in fam.coeffs(n)]
            np.testing.assert_allclose(fam.q(n, z), np.polyval(c[::-1], z), rtol=1e-10, atol=1e-10)

    def test_odd_c_shift(self):
        a, b = SkewPolyFamily.laguerre(1, 0.5), SkewPolyFamily.laguerre(1, 0.5, c=2.0)
        z = np.array([0.4, 3.0])
        for k in range(4):
            np.testing.assert_allclose(b.q(2 * k + 1, z) - a.q(2 * k + 1, z), 2.0 * a.q(2 * k, z), rtol=1e-12)

    def test_functional_wrappers(self):
        assert q_hermite(3, 0.5, 0.2, 1.1) == pytest.approx(SkewPolyFamily.hermite(0.5, 0.2).q(3, 1.1))
        assert q_laguerre(3, 1, 0.5, 0.2, 1.1) == pytest.approx(SkewPolyFamily.laguerre(1, 0.5, 0.2).q(3, 1.1))

    def test_negative_degree(self):
        with pytest.raises(DomainError):
            SkewPolyFamily.hermite(0.5).q(-1, 0.0)

    def test_degenerate_mu(self):
        with pytest.raises(DegenerateParameterError):
            SkewPolyFamily.laguerre(0, 1.0).q(2, 0.3)


class TestNorms:
    def test_hermite(self):
        assert SkewPolyFamily.hermite(0.0).norm(0) == pytest.approx(2 * math.sqrt(2 * math.pi))
        assert SkewPolyFamily.hermite(1.0).norm(1) == pytest.approx(8 * math.sqrt(2 * math.pi))

    @pytest.mark.parametrize("nu", [0, 1, 3])
    def test_laguerre_ratio(self, nu):
        mu = 0.6
        L = SkewPolyFamily.laguerre(nu, mu)
        want = 2 * math.factorial(2 + nu) / math.factorial(nu) * (1 + mu**2) ** 4
        assert L.norm(1) / L.norm(0) == pytest.approx(want, rel=1e-13)
        assert float(L.norm_ratio_exact(1, 0)) == pytest.approx(want, rel=1e-15)
        assert norm_h(L, 2) == L.norm(2)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_ratio_from_kernel_leading_coefficient(self, fam):
        # [z^{2N-1} u^{2N-2}] h_{N-1} K_{2N} = 1, and the k-th term enters with h_{N-1}/h_k
        for N in (1, 2, 3):
            K = fam.kernel_coeffs(2 * N)
            assert K[2 * N - 1][2 * N - 2] == 1
            if N >= 2:
                # [z^{2N-3} u^{2N-4}] picks up q_{2N-3} q_{2N-4} h_{N-1}/h_{N-2} plus the top term
                top = fam.coeffs(2 * N - 1)[2 * N - 3] * fam.coeffs(2 * N - 2)[2 * N - 4]
                top -= fam.coeffs(2 * N - 2)[2 * N - 3] * fam.coeffs(2 * N - 1)[2 * N - 4]
                assert K[2 * N - 3][2 * N - 4] - top == fam.norm_ratio_exact(N - 1, N - 2)


class TestKernel:
    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_n1(self, fam):
        z, u = 0.7 + 0.2j, -1.3
        assert fam.kernel(2, z, u) == pytest.approx((z - u) / fam.norm(0), rel=1e-13)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_antisymmetry(self, fam):
        z, u = np.array([0.3, 1.2 + 1j]), np.array([-0.8, 2.5])
        np.testing.assert_array_equal(fam.kernel(6, z, u), -fam.kernel(6, u, z))
        assert fam.kernel(6, 1.3, 1.3) == 0

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    def test_c_invariance(self, fam):
        z, u = np.array([0.3, 1.2 + 1j, -2.0]), np.array([-0.8, 2.5, 0.1j])
        a = fam.with_c(0.0).kernel(8, z, u)
        b = fam.with_c(5.0).kernel(8, z, u)
        np.testing.assert_allclose(a, b, rtol=1e-12)
        assert fam.with_c(0.0).kernel_coeffs(6) == fam.with_c(5.0).kernel_coeffs(6)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    @pytest.mark.parametrize("N", [0, 1, 2, 3])
    def test_two_dets_identity(self, fam, N):
        lam, gam = 0.9 + 0.3j, -0.4 + 1.1j
        lhs = fam.expect_two_dets(2 * N, lam, gam) * (lam - gam)
        rhs = fam.norm(N) * fam.kernel(2 * N + 2, lam, gam)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_two_dets_trivial(self):
        assert SkewPolyFamily.hermite(0.3).expect_two_dets(0, 1.0, 2.0) == 1
        f = SkewPolyFamily.hermite(0.3)
        assert f.expect_two_dets(4, 0.2, 1.5) == pytest.approx(f.expect_two_dets(4, 1.5, 0.2))
        assert expect_two_dets(f, 4, 0.2, 1.5) == f.expect_two_dets(4, 0.2, 1.5)

    def test_hermite_tau_zero(self):
        z, u = 0.4, 1.1
        a = SkewPolyFamily.hermite(0.0).expect_two_dets(4, z, u)
        b = SkewPolyFamily.hermite(1e-9).expect_two_dets(4, z, u)
        assert a == pytest.approx(b, rel=1e-6)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    @pytest.mark.parametrize("k", [1, 2])
    def test_two_dets_large_u_limit(self, fam, k):
        z, u = -1.5, 1e6
        assert fam.expect_two_dets(2 * k, z, u) / u ** (2 * k) == pytest.approx(fam.q(2 * k, z), rel=1e-4)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    @pytest.mark.parametrize("n", [0, 1, 2])
    def test_even_read_off(self, fam, n):
        z, u = 0.8, 1e6
        got = fam.norm(n) * fam.kernel(2 * n + 2, u, z) / u ** (2 * n + 1)
        assert got == pytest.approx(fam.q(2 * n, z), rel=1e-4)

    @pytest.mark.parametrize("fam", FAMILIES, ids=IDS)
    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_odd_read_off(self, fam, N):
        # the u^{2N-2} column of h_{N-1} K_{2N} is the odd polynomial at c = 0
        K = fam.kernel_coeffs(2 * N)
        col = [K[i][2 * N - 2] for i in range(2 * N)]
        assert col == fam.with_c(0).coeffs(2 * N - 1)

    def test_odd_count_rejected(self):
        with pytest.raises(DomainError):
            kernel_sum(SkewPolyFamily.hermite(0.5), 3, 0.1, 0.2)

    @given(st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
    @settings(max_examples=40, deadline=None)
    def test_property_antisymmetric(self, z, u):
        fam = FAMILIES[2]
        assert fam.kernel(4, z, u) == -fam.kernel(4, u, z)


def _ginibre_t0_oracle(tau, kappa):
    """t_0(kappa) for the elliptic weight by scipy quadrature on the two measure terms."""
    s = 2 * (1 + tau)
    # real-real term: the x1 integral of h(x1) sgn(x2 - x1) is sqrt(pi s) erf(x2 / sqrt(s))
    a = math.sqrt(math.pi * s)

    def real_part(fn):
        return integrate.quad(lambda x: fn(math.exp(-x * x / s) * a * special.erf(x / math.sqrt(s)) / (kappa - x)),
                              -30, 30, limit=200, epsabs=0, epsrel=1e-12)[0]

    R = real_part(lambda v: v.real) + 1j * real_part(lambda v: v.imag)

    def g(y, x):
        z = complex(x, y)
        return math.exp(-(x * x - y * y) * 2 / s) * special.erfc(math.sqrt(2) * y / math.sqrt(1 - tau * tau))

    def pair(fn):
        return integrate.dblquad(lambda y, x: fn(g(y, x) * (1 / (kappa - complex(x, -y)) - 1 / (kappa - complex(x, y)))),
                                 -25, 25, 0, 5, epsabs=0, epsrel=1e-10)[0]

    C = 2j * (pair(lambda v: v.real) + 1j * pair(lambda v: v.imag))
    return R + C


class TestCauchy:
    def test_t0_against_scipy(self):
        fam, kappa = SkewPolyFamily.hermite(0.5), 6.0 + 7.0j
        assert cauchy_transform(fam, 0, kappa) == pytest.approx(_ginibre_t0_oracle(0.5, kappa), rel=1e-7)

    def test_leading_behaviour(self):
        fam = SkewPolyFamily.hermite(0.5)
        kappa = 1e3j
        assert (cauchy_transform(fam, 0, kappa) * kappa**2).real == pytest.approx(fam.norm(0), rel=1e-2)
        assert (cauchy_transform(fam, 1, kappa) * kappa).real == pytest.approx(-fam.norm(0), rel=1e-2)

    def test_pole_proximity(self):
        with pytest.raises(PoleProximityError):
            cauchy_transform(SkewPolyFamily.hermite(0.5), 0, 0.3 + 0.01j)
