import math

import numpy as np
import pytest

from skewspec.ensembles import EnsembleSpec
from skewspec.errors import DomainError
from skewspec.massive import MassiveContext
from skewspec.sop import SkewPolyFamily
from skewspec.verify import (
    DensityHistogram,
    check_debruijn,
    check_decoupling,
    check_factorization,
    check_hratio,
    check_laurent,
    check_massive_gram,
    check_pfaffian_suite,
    check_pfid,
    check_removable_singularity,
    check_skew_orthogonality,
    check_vandermonde_suite,
    check_zprod,
    debruijn_sides,
    draw_samples,
    mass_convention_experiment,
    mc_cauchy,
    mc_char_polys,
    mc_density_histogram,
    mc_even_sop,
    mc_massive,
    mc_odd_sop,
    mc_two_dets,
    mirror_chi2,
    sector_sum_n1,
)
from skewspec.verify.identities import berezinian_one, berezinian_two
from skewspec.verify.mc import McReport, median_of_means, ratio_estimate, with_rerun
from skewspec.verify.suites import SUITES, SuiteOptions, jsonable, normalize, run_suite, run_suites

GIN = EnsembleSpec.ginibre(0, 0.5)
CHI = EnsembleSpec.chiral(0, 1, 0.6)


class TestIdentities:
    @pytest.mark.parametrize("n,m", [(1, 0), (2, 0), (1, 1), (2, 1), (0, 2), (1, 2)])
    @pytest.mark.parametrize("alpha", ["random", "unit"])
    def test_debruijn(self, n, m, alpha):
        r = check_debruijn(n, m, alpha=alpha, seed=3)
        assert r["pass"] and r["rel_err"] <= 1e-12

    def test_debruijn_by_hand(self):
        # n = 1, m = 0, two points: lhs = sum_ij F_ij (f(i) g(j) - f(j) g(i))... as a 2x2 determinant
        F = np.array([[0.0, 1.5], [-1.5, 0.0]])
        f = np.array([[1.0, 2.0], [0.5, -1.0]])
        g = np.array([[3.0, 1.0], [2.0, 4.0]])
        lhs, rhs = debruijn_sides(F, f, g, np.zeros((2, 0)))
        want = 0.0
        for i in range(2):
            for j in range(2):
                want += F[i, j] * (f[0, i] * g[1, j] - f[1, i] * g[0, j])
        assert lhs == pytest.approx(want)
        assert rhs == pytest.approx(want)

    def test_debruijn_sign_matters(self):
        # flipping the sign convention breaks the unit-border case at m = 2
        r = check_debruijn(1, 2, alpha="unit", seed=0)
        assert r["pass"]
        F = np.array([[0, 1.0, 0.3], [-1.0, 0, 2.0], [-0.3, -2.0, 0]])
        rng = np.random.default_rng(1)
        f = rng.standard_normal((4, 3))
        g = rng.standard_normal((4, 3))
        alpha = np.zeros((4, 2))
        alpha[2, 0] = alpha[3, 1] = 1.0
        lhs, rhs = debruijn_sides(F, f, g, alpha)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert abs(lhs) > 1e-3

    def test_vandermonde_and_pfaffian_suites(self):
        assert check_vandermonde_suite(8, seed=2)["pass"]
        r = check_pfaffian_suite(200, seed=2)
        assert r["pass"] and r["rel_err"]["pf_squared"] <= 1e-9 and r["rel_err"]["congruence"] <= 1e-9

    def test_berezinians(self):
        rng = np.random.default_rng(8)
        for n in (2, 3, 5):
            z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            kappa = 4.0 + 3.0j
            lhs, rhs = berezinian_one(z, kappa)
            assert lhs == pytest.approx(rhs, rel=1e-9)
            lhs, rhs = berezinian_two(z, kappa)
            assert lhs == pytest.approx(rhs, rel=1e-9)


class TestFactorization:
    def test_n1_ginibre(self):
        r = check_factorization(GIN, 1)
        assert r["pass"], r

    def test_sector_sum_positive(self):
        s = sector_sum_n1(GIN)
        assert s["real_real"] > 0 and s["pair"] > 0
        assert s["real_real"] + s["pair"] == pytest.approx(s["Z"])
        assert s["Z"] == pytest.approx(SkewPolyFamily.hermite(0.5).norm(0), rel=1e-9)

    @pytest.mark.parametrize("N", [1, 2, 3])
    def test_zprod(self, N):
        assert check_zprod(GIN, N)["pass"]

    def test_zprod_chiral(self):
        assert check_zprod(EnsembleSpec.chiral(0, 1, 0.5), 2)["pass"]


class TestOrthogonality:
    def test_hermite(self):
        r = check_skew_orthogonality(SkewPolyFamily.hermite(0.5, c=0.7), 5, 1e-6)
        assert r["pass"], r

    def test_gram_entries(self):
        from skewspec.verify.orthogonality import sop_gram

        fam = SkewPolyFamily.hermite(0.5, c=0.7)
        G = sop_gram(fam, 3)
        assert abs(G[0, 3]) <= 1e-9 * fam.norm(0)
        assert G[2, 3] == pytest.approx(fam.norm(1), rel=1e-9)
        np.testing.assert_allclose(G, -G.T, atol=1e-9 * fam.norm(1))

    def test_laurent_hermite(self):
        for n in range(4):
            r = check_laurent(SkewPolyFamily.hermite(0.5), n)
            assert r["pass"], r


class TestMonteCarlo:
    def test_even_and_two_dets(self):
        for spec in (GIN, CHI):
            assert mc_even_sop(spec, 2, 0.7, samples=20_000, seed=4).passed
            assert mc_two_dets(spec, 2, 0.7, -0.6 + 0.2j, samples=20_000, seed=4).passed

    def test_odd_c_shift_is_exact_per_draw(self):
        kw = dict(samples=5_000, seed=9, rerun=False)
        a = mc_odd_sop(GIN, 4, 0.4 + 0.3j, c=0.0, **kw)
        b = mc_odd_sop(GIN, 4, 0.4 + 0.3j, c=3.0, **kw)
        e = mc_even_sop(GIN, 4, 0.4 + 0.3j, **kw)
        assert b.estimate - a.estimate == pytest.approx(3 * e.estimate, rel=1e-12)
        assert b.target - a.target == pytest.approx(3 * e.target, rel=1e-12)

    def test_n0_odd_is_exact(self):
        r = mc_odd_sop(GIN, 0, 1.3, c=0.2, samples=100, seed=0)
        assert r.target == pytest.approx(1.5) and r.estimate == pytest.approx(1.5) and r.passed

    def test_thread_independence(self):
        a = draw_samples(CHI, 4, 20_000, seed=5, threads=1)
        b = draw_samples(CHI, 4, 20_000, seed=5, threads=3)
        np.testing.assert_array_equal(a.eigs, b.eigs)

    def test_seed_changes_samples(self):
        a = draw_samples(GIN, 2, 100, seed=1)
        b = draw_samples(GIN, 2, 100, seed=2)
        assert not np.array_equal(a.eigs, b.eigs)

    def test_cauchy(self):
        r = mc_cauchy(GIN, 2, mode="even", samples=20_000, seed=3)
        assert r.passed
        assert r.params["kappa"][0] == 0 and r.params["kappa"][1] > 0
        r = mc_cauchy(GIN, 2, mode="odd", c=0.3, samples=20_000, seed=3)
        assert r.passed

    def test_cauchy_kappa_too_small_fails(self):
        with pytest.warns(RuntimeWarning):
            r = mc_cauchy(GIN, 2, kappa=6j, samples=2_000, seed=3, rerun=False)
        assert not r.passed

    def test_char_polys_against_massive_ratio(self):
        fam = SkewPolyFamily.hermite(0.5)
        ctx = MassiveContext(fam, (0.9, 1.4), 2)
        from skewspec.massive import expect_char_polys

        target = expect_char_polys(fam, 2, ctx.points)
        assert mc_char_polys(GIN, 2, ctx.points, target, samples=50_000, seed=2).passed

    def test_massive_even(self):
        ctx = MassiveContext(SkewPolyFamily.laguerre(1, 0.6), (1.2,), 2)
        assert mc_massive(ctx, "even", 0.7, samples=50_000, seed=1).passed

    def test_massive_unknown_kind(self):
        ctx = MassiveContext(SkewPolyFamily.hermite(0.5), (1.2,), 2)
        with pytest.raises(DomainError):
            mc_massive(ctx, "nope", 0.7, samples=100, rerun=False)

    def test_rerun_policy(self):
        calls = []

        def run(samples, stream):
            calls.append((samples, stream))
            ok = stream == 1
            return McReport("x", {}, samples, 0j, 1.0, 0j if ok else 10 + 0j, 0.0 if ok else 10.0)

        r = with_rerun(run, 1000)
        assert calls == [(1000, 0), (4000, 1)]
        assert r.reran and r.passed

    def test_estimators(self):
        v = np.arange(32, dtype=float)
        est, se = median_of_means(v, blocks=4)
        assert est == pytest.approx(np.median([3.5, 11.5, 19.5, 27.5]))
        est, se = ratio_estimate(2 * v + 1, v + 1)
        assert est == pytest.approx((2 * v + 1).sum() / (v + 1).sum())
        assert se >= 0

    def test_odd_count_rejected(self):
        with pytest.raises(DomainError):
            mc_even_sop(GIN, 3, 0.1, samples=10)


class TestMassiveChecks:
    def test_convention_experiment(self):
        r = mass_convention_experiment(SkewPolyFamily.hermite(0.5), (0.8,), 1)
        assert r["selected"] == "minus-m-squared" and r["pass"]

    def test_gram(self):
        assert check_massive_gram(SkewPolyFamily.hermite(0.5), (0.8, 1.4), 1)["pass"]

    def test_pfid(self):
        assert check_pfid(SkewPolyFamily.laguerre(1, 0.6), (0.7, 1.2, 1.9), 2)["pass"]

    @pytest.mark.parametrize("nf", [1, 2])
    def test_decoupling_chiral(self, nf):
        r = check_decoupling(SkewPolyFamily.laguerre(1, 0.6), nf, 1)
        assert r["pass"], r

    def test_hratio_and_singularity(self):
        fam = SkewPolyFamily.laguerre(1, 0.6)
        assert check_hratio(fam, (0.8, 1.4, 2.0), 2)["pass"]
        assert check_removable_singularity(fam, (0.8, 1.4), 1)["pass"]


class TestDensity:
    def test_bins_and_normalisation(self):
        spec = EnsembleSpec.ginibre(4, 0.3)
        h = mc_density_histogram(spec, 4000, 15, seed=1, extent=6.0)
        assert h.counts2d.shape == (15, 15) and h.counts_real.shape == (15,)
        area = np.outer(np.diff(h.x_edges), np.diff(h.y_edges))
        assert np.sum(h.density2d * area) == pytest.approx(4, rel=1e-2)
        assert 0 < h.real_fraction < 1

    def test_even_bins_get_odd_rows(self):
        h = mc_density_histogram(EnsembleSpec.ginibre(2, 0.3), 500, 10, seed=1)
        assert h.counts2d.shape == (10, 11)
        # real eigenvalues fall in the central row
        assert h.counts2d[:, 5].sum() >= h.counts_real.sum()

    def test_mirror_symmetry(self):
        h = mc_density_histogram(EnsembleSpec.ginibre(6, 0.2), 20_000, 11, seed=2)
        r = mirror_chi2(h)
        assert r["dof"] > 0
        # chi2 / dof ~ 1 for a symmetric distribution
        assert r["chi2"] <= r["dof"] + 5 * math.sqrt(2 * r["dof"])

    def test_real_fraction_decreases_with_n(self):
        f = [mc_density_histogram(EnsembleSpec.ginibre(n, 0.3), 4000, 9, seed=1).real_fraction for n in (2, 8)]
        assert f[1] < f[0]

    def test_bins_positive(self):
        with pytest.raises(DomainError):
            mc_density_histogram(EnsembleSpec.ginibre(2, 0.3), 100, 0)


class TestSuites:
    def test_names(self):
        assert SUITES == ("skew-orthogonality", "mc", "identities", "factorization", "massive")

    def test_unknown(self):
        with pytest.raises(KeyError):
            run_suite("nope")

    def test_identities_suite(self):
        res = run_suite("identities", SuiteOptions(seed=1))
        assert res and all(r["verdict"] == "pass" and r["suite"] == "identities" for r in res)

    def test_all_expands(self, monkeypatch):
        from skewspec.verify import suites

        monkeypatch.setattr(suites, "_RUNNERS", {k: (lambda opt, k=k: [{"check": k}]) for k in SUITES})
        assert [r["check"] for r in run_suites(["all"])] == list(SUITES)

    def test_jsonable(self):
        d = jsonable({"a": np.float64(1.5), "b": 1 + 2j, "c": np.array([1, 2]), "d": np.bool_(True),
                      "e": float("nan")})
        assert d == {"a": 1.5, "b": [1.0, 2.0], "c": [1, 2], "d": True, "e": None}

    def test_normalize(self):
        assert normalize({"check": "x", "params": {}, "pass": False})["verdict"] == "fail"
