import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from skewspec.ensembles import EnsembleSpec
from skewspec.errors import DegenerateParameterError, DomainError, SingularPointError
from skewspec.specfun import bessel_k
from skewspec.weights import (
    MassConvention,
    QuadratureSpec,
    WeightSpec,
    ginibre_reduced_g,
    ginibre_reduced_h,
    gram_matrix,
    measure_F_split,
    skew_product,
    weight_g,
    weight_h,
)

GIN = WeightSpec(EnsembleSpec.ginibre(0, 0.5))
CHI = WeightSpec(EnsembleSpec.chiral(0, 1, 0.5))


def poly(c):
    return lambda z: np.polyval(c[::-1], z)


class TestPointwise:
    def test_ginibre_reduced(self):
        assert ginibre_reduced_h(0.5, 0.0) == 1.0
        assert ginibre_reduced_h(0.5, 1.0, masses=(2.0,)) == pytest.approx(5 * math.exp(-1))
        want = math.exp(2) * special.erfc(2 / math.sqrt(0.5))
        assert ginibre_reduced_g(0.5, 1j) == pytest.approx(want, rel=1e-14)

    def test_ginibre_h(self):
        assert weight_h(GIN, 0.0) == 1.0
        assert weight_h(GIN, 1.2) == pytest.approx(math.exp(-1.44 / 3))

    def test_chiral_half_order(self):
        e = CHI.ensemble
        want = 2 * bessel_k(0.5, e.eta_plus) * math.exp(e.eta_minus)
        assert weight_h(CHI, 1.0) == pytest.approx(want, rel=1e-13)
        closed = 2 * math.sqrt(math.pi / (2 * e.eta_plus)) * math.exp(-e.eta_plus + e.eta_minus)
        assert weight_h(CHI, 1.0) == pytest.approx(closed, rel=1e-13)

    def test_chiral_origin(self):
        with pytest.raises(SingularPointError):
            weight_h(CHI, 0.0)

    def test_g_needs_upper_half_plane(self):
        with pytest.raises(DomainError):
            weight_g(GIN, 1.0 - 0.5j)

    @pytest.mark.parametrize("w", [GIN, CHI, WeightSpec(EnsembleSpec.chiral(0, 2, 0.3))], ids=["gin", "chi1", "chi2"])
    def test_boundary_relation(self, w):
        x = np.array([-2.0, -0.5, 0.7, 1.5, 3.0])
        g = weight_g(w, x + 1e-6j)
        h = weight_h(w, x)
        np.testing.assert_array_less(np.abs(g / h**2 - 1), 1e-3)

    def test_chiral_g_against_quad(self):
        from scipy.integrate import quad

        e = CHI.ensemble
        z = 0.8 + 0.6j
        ep, em = e.eta_plus, e.eta_minus

        def f(s):
            t = math.exp(s)
            return (math.exp(-ep**2 * t * 2 * (z * z).real - 1 / (4 * t))
                    * special.kv(e.nu / 2, 2 * ep**2 * t * abs(z) ** 2)
                    * special.erfc(2 * ep * math.sqrt(t) * z.imag))

        inner = quad(f, -30, 30, epsabs=0, epsrel=1e-12, limit=400)[0]
        want = 2 * abs(z) ** e.nu * math.exp(2 * em * z.real) * inner
        assert weight_g(CHI, z) == pytest.approx(want, rel=1e-9)

    def test_mass_factor(self):
        e = EnsembleSpec.chiral(0, 0, 0.5, masses=(1.5,))
        plus = WeightSpec(e, True, MassConvention.PLUS)
        minus = WeightSpec(e, True, MassConvention.MINUS)
        assert plus.mass_factor(0.5) == pytest.approx(2.75)
        assert minus.mass_factor(0.5) == pytest.approx(1.75)
        assert minus.insertion_points()[0] == pytest.approx(2.25)
        g = WeightSpec(EnsembleSpec.ginibre(0, 0.5, masses=(2.0,)))
        np.testing.assert_allclose(sorted(g.insertion_points().real), [-2, 2])
        assert WeightSpec(e, False).mass_factor(3.0) == 1.0

    def test_mu_one(self):
        with pytest.raises(DegenerateParameterError):
            WeightSpec(EnsembleSpec.chiral(0, 0, 1.0))

    @pytest.mark.parametrize("w", [GIN, CHI])
    def test_measure_record(self, w):
        rec = measure_F_split(w)
        assert {t["name"] for t in rec["terms"]} == {"real-real", "complex-pair"}


class TestSkewProduct:
    def test_self_product_vanishes(self):
        f = poly([0.3, -1.0, 0.5])
        assert abs(skew_product(f, f, GIN)) < 1e-12

    @pytest.mark.parametrize("c", [0.0, 0.7, -2.0])
    def test_first_norm(self, c):
        got = skew_product(poly([1.0]), poly([c, 1.0]), GIN)
        assert got.real == pytest.approx(2 * 1.5 * math.sqrt(2 * math.pi), rel=1e-10)
        assert abs(got.imag) < 1e-12

    def test_block_zero(self):
        assert abs(skew_product(poly([1.0]), poly([-0.5, 0, 1.0]), GIN)) < 1e-11

    @pytest.mark.parametrize("w", [GIN, CHI], ids=["gin", "chi"])
    def test_antisymmetry_and_bilinearity(self, w):
        rng = np.random.default_rng(3)
        q = QuadratureSpec()
        for _ in range(3):
            a, b, c = (rng.standard_normal(3) for _ in range(3))
            s = rng.standard_normal(2)
            fg = skew_product(poly(a), poly(b), w, q)
            gf = skew_product(poly(b), poly(a), w, q)
            assert abs(fg + gf) <= 1e-9 * (abs(fg) + 1)
            comb = skew_product(poly(s[0] * a + s[1] * c), poly(b), w, q)
            lin = s[0] * fg + s[1] * skew_product(poly(c), poly(b), w, q)
            assert abs(comb - lin) <= 1e-9 * (abs(lin) + 1)

    @pytest.mark.parametrize("w", [GIN, CHI], ids=["gin", "chi"])
    def test_truncation_soundness(self, w):
        f, g = poly([0.2, 1.0, 0.0, 1.0]), poly([1.0, -0.4])
        base = skew_product(f, g, w)
        from skewspec.weights import integration_domain

        dom = integration_domain(w, QuadratureSpec(), 8)
        L = max(-dom.real_lo, dom.real_hi, -dom.cx_lo, dom.cx_hi, dom.cy_hi)
        wide = QuadratureSpec(real_cutoff=2 * L, radius=2 * L)
        assert abs(skew_product(f, g, w, wide) - base) <= 1e-8 * abs(base)

    def test_gram_matrix_shape(self):
        G = gram_matrix(lambda p: np.stack([np.ones_like(p), p, p * p]), GIN, degree=2)
        assert G.shape == (3, 3)
        np.testing.assert_allclose(G, -G.T, atol=1e-12)

    @given(st.lists(st.floats(-2, 2), min_size=2, max_size=4), st.lists(st.floats(-2, 2), min_size=2, max_size=4))
    @settings(max_examples=15, deadline=None)
    def test_property_antisymmetry(self, a, b):
        fg = skew_product(poly(a), poly(b), GIN)
        gf = skew_product(poly(b), poly(a), GIN)
        assert abs(fg + gf) <= 1e-9 * (abs(fg) + 1)
