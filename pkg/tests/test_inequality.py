import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from eigenratio import fem
from eigenratio import inequality as ineq
from eigenratio.mesh import (GeometrySummary, center_at_area_centroid, gen_cube_surface, gen_icosphere,
                             gen_torus, summarize, surface_area)
from eigenratio.spectra import (SurfaceSpectrum, VolumeSpectrum, ball_dirichlet_reference, cube_dirichlet_reference,
                                sphere_reference, surface_spectrum)

PI = math.pi
SPHERE_AREA, BALL_VOL = 4 * PI, 4 * PI / 3
positive = st.floats(1e-3, 1e3, allow_nan=False)


def analytic_pair(radius=1.0, count=4):
    summary = GeometrySummary(4 * PI * radius**2, 4 * PI * radius**3 / 3, 0, 2, (0.0, 0.0, 0.0))
    lam = sphere_reference(radius, count)
    surf = SurfaceSpectrum(summary, lam, np.zeros(count), 1, 0.0)
    vol = VolumeSpectrum(summary.volume, summary.area, ball_dirichlet_reference(radius, count), np.zeros(count))
    return surf, vol


class TestConstants:
    def test_dim3(self):
        c = ineq.Constants.for_dim(3)
        assert c.omega == pytest.approx(4 * PI / 3, rel=1e-14)
        assert c.weyl**1.5 == pytest.approx(6 * PI**2, rel=1e-12)

    def test_genus0_optimal(self):
        assert ineq.GENUS0_OPTIMAL == pytest.approx(10.962, abs=1e-3)


class TestReport:
    @settings(max_examples=200)
    @given(lhs=st.floats(-1e6, 1e6), rhs=st.floats(-1e6, 1e6))
    def test_satisfied_definition(self, lhs, rhs):
        r = ineq.report("x", lhs, rhs)
        assert r.margin == lhs - rhs
        assert r.satisfied == (r.margin >= -1e-9 * max(abs(lhs), abs(rhs)))
        assert 0 <= r.equality_gap <= 2

    def test_within_discretization(self):
        assert ineq.report("x", 0.995, 1.0).within_discretization
        assert not ineq.report("x", 0.98, 1.0).within_discretization
        assert ineq.report("x", 1.04, 1.0).near_equality()
        assert not ineq.report("x", 1.04, 1.0).near_equality(0.01)


class TestReilly:
    def test_sphere_equality(self):
        r = ineq.check_reilly(SPHERE_AREA, 2.0, BALL_VOL)
        assert r.lhs == pytest.approx(BALL_VOL, rel=1e-14)
        assert r.equality_gap < 1e-14 and r.satisfied

    def test_cube_strict(self, cube8):
        lam1 = surface_spectrum(cube8, 1)[1]
        r = ineq.check_reilly(6.0, lam1, 1.0)
        assert r.satisfied and r.margin > 0.1

    @pytest.mark.parametrize("lam", [1e-300, 0.0])
    def test_degenerate_lambda(self, lam):
        r = ineq.check_reilly(6.0, lam, 1.0)
        assert r.satisfied and r.margin > 1e100

    def test_bad_input(self):
        with pytest.raises(ineq.InequalityError):
            ineq.check_reilly(-1.0, 2.0, 1.0)


class TestYangYau:
    def test_sphere(self):
        r = ineq.check_yang_yau(2.0, SPHERE_AREA, 0)
        assert r.equality_gap < 1e-14 and r.satisfied

    def test_torus(self, torus32):
        s = summarize(torus32)
        r = ineq.check_yang_yau(surface_spectrum(torus32, 1)[1], s.area, 1)
        assert r.rhs < 16 * PI and r.margin > 0

    def test_floor_variant(self):
        r = ineq.check_yang_yau(1.0, 1.0, 2)
        assert r.extra["floor_bound"] == pytest.approx(16 * PI)
        assert r.lhs == pytest.approx(24 * PI)


class TestLiYau:
    def test_ball_k1(self):
        r = ineq.check_li_yau_pointwise(PI**2, 1, BALL_VOL)
        assert r.rhs == pytest.approx(3.51, abs=5e-3)
        assert r.margin == pytest.approx(6.36, abs=5e-3)
        assert r.satisfied

    def test_cube_analytic_pointwise_and_average(self):
        lam = cube_dirichlet_reference(1.0, 1000)
        assert all(ineq.check_li_yau_pointwise(lam[k - 1], k, 1.0).satisfied for k in range(1, 1001))
        assert all(ineq.check_li_yau_average(lam[:k], 1.0).satisfied for k in range(1, 1001))

    def test_k1_average_is_pointwise(self):
        a = ineq.check_li_yau_average([7.3], 2.0)
        p = ineq.check_li_yau_pointwise(7.3, 1, 2.0)
        assert (a.lhs, a.rhs) == (p.lhs, p.rhs)

    def test_non_ascending(self):
        with pytest.raises(ineq.InequalityError, match="non-decreasing"):
            ineq.check_li_yau_average([3.0, 2.0], 1.0)


class TestPolya:
    def test_cube_analytic(self):
        lam = cube_dirichlet_reference(1.0, 1000)
        reports = [ineq.check_polya_dirichlet(lam[k - 1], k, 1.0) for k in range(1, 1001)]
        assert all(r.satisfied and r.conjectural for r in reports)

    def test_ball_k1(self):
        r = ineq.check_polya_dirichlet(PI**2, 1, BALL_VOL)
        assert r.rhs == pytest.approx(5.84, abs=1e-2)
        assert r.satisfied

    @given(t=st.floats(0.1, 10), lam=positive, k=st.integers(1, 50), vol=positive)
    def test_scale_verdict(self, t, lam, k, vol):
        a = ineq.check_polya_dirichlet(lam, k, vol)
        b = ineq.check_polya_dirichlet(lam / t**2, k, vol * t**3)
        assume(abs(a.margin) > 1e-6 * a.rhs)
        assert a.satisfied == b.satisfied
        assert a.equality_gap == pytest.approx(b.equality_gap, rel=1e-9, abs=1e-12)


class TestIsoperimetricFaberKrahn:
    def test_sphere(self):
        assert ineq.check_isoperimetric(SPHERE_AREA, BALL_VOL).equality_gap < 1e-14

    def test_cube(self):
        r = ineq.check_isoperimetric(6.0, 1.0)
        assert r.rhs == pytest.approx(4.836, abs=1e-3) and r.satisfied

    def test_torus_pappus(self):
        assert ineq.check_isoperimetric(8 * PI**2, 4 * PI**2).margin > 0

    def test_fk_ball(self):
        assert ineq.check_faber_krahn(PI**2, BALL_VOL).equality_gap < 1e-14

    def test_fk_cube(self):
        r = ineq.check_faber_krahn(3 * PI**2, 1.0)
        assert r.rhs == pytest.approx(PI**2 * 2.598, rel=1e-3) and r.satisfied

    @pytest.mark.parametrize("t", [0.5, 3.0])
    def test_fk_scaled_ball(self, t):
        assert ineq.check_faber_krahn(PI**2 / t**2, BALL_VOL * t**3).equality_gap < 1e-13


class TestRatio:
    def test_analytic_exact(self):
        surf, vol = analytic_pair()
        r = ineq.main_ratio(surf, vol, 1)
        assert r.ratio == pytest.approx(PI**3 / (2 * math.sqrt(2)), rel=1e-12)
        assert ineq.ratio_value(PI**2, 2.0, 2.0) == pytest.approx(ineq.GENUS0_OPTIMAL, rel=1e-12)

    def test_scale_invariant(self):
        a = ineq.main_ratio(*analytic_pair(1.0), 1).ratio
        b = ineq.main_ratio(*analytic_pair(2.0), 1).ratio
        assert a == pytest.approx(b, rel=1e-12)

    def test_out_of_range(self):
        with pytest.raises(ineq.InequalityError):
            ineq.main_ratio(*analytic_pair(count=3), 4)

    def test_genus0_guard(self):
        with pytest.raises(ineq.InequalityError, match="genus-0 check applied to genus > 0"):
            ineq.check_genus0_optimal(5.0, 0.25, genus=1)

    def test_genus0_sphere(self):
        assert ineq.check_genus0_optimal(PI**2, 2.0).equality_gap < 1e-13


class TestKorevaar:
    def test_sphere(self):
        assert ineq.korevaar_estimate(2.0, 1, SPHERE_AREA, 0) == pytest.approx(8 * PI)
        assert ineq.korevaar_estimate(6.0, 4, SPHERE_AREA, 0) == pytest.approx(6 * PI)

    def test_envelope(self):
        c, k = ineq.korevaar_envelope(sphere_reference(1.0, 8), SPHERE_AREA, 0)
        assert (c, k) == (pytest.approx(8 * PI), 1)

    @given(t=st.floats(0.1, 10), lam=positive, k=st.integers(1, 100), area=positive, g=st.integers(0, 5))
    def test_scale_invariant(self, t, lam, k, area, g):
        assert ineq.korevaar_estimate(lam / t**2, k, area * t**2, g) == pytest.approx(
            ineq.korevaar_estimate(lam, k, area, g), rel=1e-12)


class TestConstantsFormulas:
    def test_k_g_value(self):
        assert ineq.k_g(8 * PI, 0) == pytest.approx(2.323, abs=1e-3)

    @given(C=positive, g=st.integers(0, 10))
    def test_k_g_genus_scaling(self, C, g):
        assert ineq.k_g(C, g) * (g + 1) == pytest.approx(ineq.k_g(C, 0), rel=1e-13)
        assert ineq.k_g(2 * C, g) == pytest.approx(ineq.k_g(C, g) / 2, rel=1e-13)

    def test_k_n_matches_k_g(self, rng):
        for C in rng.uniform(1.0, 100.0, 20):
            assert ineq.k_n(2, C) == pytest.approx(ineq.k_g(C, 0), rel=1e-12)
        assert ineq.k_n(2, 8 * PI) == pytest.approx(ineq.k_g(8 * PI, 0), rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_k_n_decreasing(self, n):
        values = [ineq.k_n(n, C) for C in (1.0, 10.0, 1e3, 1e6)]
        assert np.all(np.diff(values) < 0) and values[-1] < 1e-2 * values[0]


class TestRayleighTrace:
    def test_centered_sphere(self, ico4):
        m = center_at_area_centroid(ico4)
        S, M = fem.assemble_surface_stiffness(m), fem.assemble_surface_mass(m)
        r = ineq.check_rayleigh_trace(m, S, M, surface_spectrum(m, 1)[1])
        assert r.satisfied and r.equality_gap <= 0.02
        assert r.extra["coordinate_energy"] == pytest.approx(2 * surface_area(m), rel=1e-9)

    def test_centered_cube(self, cube8):
        m = center_at_area_centroid(cube8)
        S, M = fem.assemble_surface_stiffness(m), fem.assemble_surface_mass(m)
        r = ineq.check_rayleigh_trace(m, S, M, surface_spectrum(m, 1)[1])
        assert r.satisfied and r.margin > 0.1

    def test_uncentered(self, cube8):
        S, M = fem.assemble_surface_stiffness(cube8), fem.assemble_surface_mass(cube8)
        with pytest.raises(ineq.InequalityError, match="centering precondition violated"):
            ineq.check_rayleigh_trace(cube8, S, M, 4.0)


class TestProofChain:
    def test_sphere_ball(self):
        surf, vol = analytic_pair()
        reilly, li_yau, korevaar, product = ineq.proof_chain(surf, vol, 1, 0, 8 * PI)
        assert reilly.satisfied and li_yau.satisfied
        assert korevaar.equality_gap < 1e-14 and korevaar.satisfied
        assert product.satisfied and product.lhs >= ineq.k_g(8 * PI, 0)
        assert product.extra["factors_satisfied"]

    def test_bad_candidate_flags_korevaar(self):
        surf, vol = analytic_pair()
        korevaar = ineq.proof_chain(surf, vol, 1, 0, 8 * PI * 0.9)[2]
        assert not korevaar.satisfied

    @settings(max_examples=100)
    @given(area=positive, vol=positive, lam1=positive, lamk_factor=st.floats(1, 10),
           lamd=positive, k=st.integers(1, 3), g=st.integers(0, 3), C=positive)
    def test_product_follows_factors(self, area, vol, lam1, lamk_factor, lamd, k, g, C):
        summary = GeometrySummary(area, vol, g, 2 - 2 * g, (0.0, 0.0, 0.0))
        lam = np.array([lam1, lam1 * lamk_factor, lam1 * lamk_factor])
        surf = SurfaceSpectrum(summary, lam, np.zeros(3), 1, 0.0)
        vs = VolumeSpectrum(vol, area, np.full(3, lamd), np.zeros(3))
        reports = ineq.proof_chain(surf, vs, k, g, C)
        if all(r.margin >= 0 for r in reports[:3]):
            assert reports[3].margin >= -1e-12 * reports[3].rhs
        # factor sides multiply out to the ratio and K_g
        lhs = np.prod([r.lhs for r in reports[:3]])
        rhs = np.prod([r.rhs for r in reports[:3]])
        assert lhs == pytest.approx(reports[3].lhs, rel=1e-10)
        assert rhs == pytest.approx(reports[3].rhs, rel=1e-10)
