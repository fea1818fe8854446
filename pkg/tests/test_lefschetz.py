"""Fixed-point map, homogenization, infinity indices, and the index-sum
decomposition."""

import math

import numpy as np
import pytest

from lenslef import catalog, imaging
from lenslef.catalog import ControlParams, ModelId, instantiate
from lenslef.errors import (CausticSource, DegenerateMultiplier,
                            UnequalDegrees)
from lenslef.lefschetz import (affine_lefschetz_sum, fixed_point_map,
                               homogenize, indeterminacy_points,
                               infinity_fixed_points, lefschetz_total,
                               rational_fixed_point_check)
from lenslef.polycore import UniPoly

S3 = math.sqrt(3.0)

EQUAL_DEGREE = [ModelId.ELLIPTIC_UMBILIC, ModelId.HYPERBOLIC_UMBILIC,
                ModelId.ELLIPTIC_UMBILIC_LENSING, ModelId.HYPERBOLIC_UMBILIC_LENSING]
UNEQUAL_DEGREE = [ModelId.FOLD, ModelId.CUSP, ModelId.SWALLOWTAIL]


def default_params(mid, y=(0.3, 0.4)):
    if mid in catalog.C_MODELS:
        return ControlParams(y=y, c=1.5)
    if mid in catalog.P_MODELS:
        return ControlParams(y=y, p=1.0)
    return ControlParams(y=y)


class TestFixedPointMap:
    def test_fold_components(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        fm = fixed_point_map(m)
        assert fm.f[0].is_zero                       # z1 - z1 + 0
        assert fm.f[1].terms == {(0, 1): 1.0 + 0j, (0, 2): -1.0 + 0j, (0, 0): 1.0 + 0j}

    def test_hyperbolic_umbilic_components(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=1.0))
        fm = fixed_point_map(m)
        assert fm.f[0].terms == {(1, 0): 1.0 + 0j, (2, 0): 3.0 + 0j, (0, 1): 1.0 + 0j}
        assert fm.f[1].terms == {(0, 1): 1.0 + 0j, (0, 2): 3.0 + 0j, (1, 0): 1.0 + 0j}

    def test_solutions_are_fixed_points(self):
        for mid in ModelId:
            m = instantiate(mid, default_params(mid))
            fm = fixed_point_map(m)
            ss = imaging.solve_images(m)
            for s in ss.solutions:
                w1, w2 = s.position
                d = max(abs(fm.f[0](w1, w2) - w1), abs(fm.f[1](w1, w2) - w2))
                assert d <= 1e-10

    def test_determinant_identity_at_random_points(self):
        """det(I - Df) equals det J_eta pointwise to relative 1e-12."""
        rng = np.random.default_rng(21)
        for mid in ModelId:
            m = instantiate(mid, default_params(mid))
            fm = fixed_point_map(m)
            for _ in range(100):
                v = rng.uniform(-2, 2, 4)
                w1, w2 = complex(v[0], v[1]), complex(v[2], v[3])
                lhs = fm.det_i_minus_df(w1, w2)
                rhs = m.det_jac(w1, w2)
                assert abs(lhs - rhs) <= 1e-12 * (1.0 + abs(rhs))

    def test_complex_zeta_accepted(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=1.0))
        fm = fixed_point_map(m, zeta=(0.5 + 0.25j, -0.1j))
        assert fm.f[0].terms[(0, 0)] == 0.5 + 0.25j


class TestAffineSum:
    @pytest.mark.parametrize("mid,params", [
        (ModelId.CUSP, ControlParams(y=(-3.0, 0.0))),
        (ModelId.FOLD, ControlParams(y=(0.0, 1.0))),
        (ModelId.HYPERBOLIC_UMBILIC_LENSING, ControlParams(y=(0.0, 0.0), p=1.0)),
    ])
    def test_fixture_sums_vanish(self, mid, params):
        m = instantiate(mid, params)
        fm = fixed_point_map(m)
        ss = imaging.solve_images(m)
        assert abs(affine_lefschetz_sum(fm, ss)) <= 1e-10


class TestHomogenize:
    def test_fold_full_map(self):
        zeta = (0.25, 1.0)
        m = instantiate(ModelId.FOLD, ControlParams(y=zeta))
        pm = homogenize(fixed_point_map(m))
        # F = (Z0^2, zeta1 Z0^2, Z2 Z0 - Z2^2 + zeta2 Z0^2)
        assert dict(pm.components[0].terms) == {(2, 0, 0): 1.0 + 0j}
        assert dict(pm.components[1].terms) == {(2, 0, 0): 0.25 + 0j}
        assert dict(pm.components[2].terms) == {
            (1, 0, 1): 1.0 + 0j, (0, 0, 2): -1.0 + 0j, (2, 0, 0): 1.0 + 0j}

    def test_hyperbolic_umbilic_infinity_restriction(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=1.0))
        pm = homogenize(fixed_point_map(m))
        a = pm.components[1].restrict_infinity()
        b = pm.components[2].restrict_infinity()
        assert a.coeffs == (3.0 + 0j, 0j, 0j)        # 3 Z1^2
        assert b.coeffs == (0j, 0j, 3.0 + 0j)        # 3 Z2^2

    def test_elliptic_umbilic_infinity_restriction(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=3.0))
        pm = homogenize(fixed_point_map(m))
        a = pm.components[1].restrict_infinity()
        b = pm.components[2].restrict_infinity()
        assert a.coeffs == (3.0 + 0j, 0j, -3.0 + 0j)  # 3 Z1^2 - 3 Z2^2
        assert b.coeffs == (0j, -6.0 + 0j, 0j)        # -6 Z1 Z2

    def test_restriction_to_affine_chart_reproduces_f(self):
        for mid in ModelId:
            m = instantiate(mid, default_params(mid))
            fm = fixed_point_map(m)
            pm = homogenize(fm)
            for k in (0, 1):
                rest = pm.components[k + 1].restrict_affine()
                assert rest.allclose(fm.f[k], tol=1e-14)

    def test_equal_degrees_flag(self):
        for mid in EQUAL_DEGREE:
            m = instantiate(mid, default_params(mid))
            assert homogenize(fixed_point_map(m)).equal_degrees
        for mid in UNEQUAL_DEGREE:
            m = instantiate(mid, default_params(mid))
            assert not homogenize(fixed_point_map(m)).equal_degrees


class TestIndeterminacy:
    def test_equal_degree_models_clean(self):
        for mid in EQUAL_DEGREE:
            m = instantiate(mid, default_params(mid))
            assert indeterminacy_points(homogenize(fixed_point_map(m))) == []

    def test_fold_point(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        pts = indeterminacy_points(homogenize(fixed_point_map(m)))
        assert len(pts) == 1
        z1, z2 = pts[0]
        assert z1 == pytest.approx(1.0, abs=1e-12)     # (0 : 1 : 0)
        assert abs(z2) <= 1e-12

    def test_cusp_point(self):
        m = instantiate(ModelId.CUSP, ControlParams(y=(0.0, 1.0)))
        pts = indeterminacy_points(homogenize(fixed_point_map(m)))
        assert len(pts) == 1
        assert pts[0][0] == pytest.approx(1.0, abs=1e-12)

    def test_swallowtail_point(self):
        m = instantiate(ModelId.SWALLOWTAIL, ControlParams(y=(0.0, 1.0), c=0.5))
        pts = indeterminacy_points(homogenize(fixed_point_map(m)))
        assert len(pts) == 1
        z1, z2 = pts[0]
        assert abs(z1) <= 1e-12                        # (0 : 0 : 1)
        assert z2 == pytest.approx(1.0, abs=1e-12)


class TestInfinityFixedPoints:
    def test_hyperbolic_umbilic_squaring_map(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC, ControlParams(y=(0.3, 0.7), c=1.0))
        pts = infinity_fixed_points(homogenize(fixed_point_map(m)))
        assert len(pts) == 3
        lams = sorted(p.multiplier.real for p in pts)
        assert lams[0] == pytest.approx(0.0, abs=1e-10)
        assert lams[1] == pytest.approx(0.0, abs=1e-10)
        assert lams[2] == pytest.approx(2.0, abs=1e-10)
        idx = sorted(p.index.real for p in pts)
        assert idx == pytest.approx([-1.0, 1.0, 1.0], abs=1e-10)
        assert abs(sum(p.index for p in pts) - 1.0) <= 1e-10

    def test_elliptic_umbilic_deltoid_map(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=3.0))
        pts = infinity_fixed_points(homogenize(fixed_point_map(m)))
        assert len(pts) == 3
        # chart fixed points u in {0, +sqrt3, -sqrt3}, all with multiplier -2
        us = sorted((p.point[1] / p.point[0]).real for p in pts)
        assert us == pytest.approx([-S3, 0.0, S3], abs=1e-10)
        for p in pts:
            assert p.multiplier == pytest.approx(-2.0, abs=1e-10)
            assert p.index == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_elliptic_lensing_same_indices(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC_LENSING,
                        ControlParams(y=(0.0, 0.0), p=1.0))
        pts = infinity_fixed_points(homogenize(fixed_point_map(m)))
        assert len(pts) == 3
        for p in pts:
            assert p.multiplier == pytest.approx(-2.0, abs=1e-10)
        assert abs(sum(p.index for p in pts) - 1.0) <= 1e-10

    def test_count_is_m_plus_one_generic(self):
        rng = np.random.default_rng(22)
        for mid in EQUAL_DEGREE:
            box = imaging.DEFAULT_BOXES[mid]
            for _ in range(25):
                params = imaging.draw_params(mid, box, rng)
                m = instantiate(mid, params)
                pts = infinity_fixed_points(homogenize(fixed_point_map(m)))
                assert len(pts) == m.m + 1

    def test_points_are_chart_fixed_points(self):
        """|g(u*) - u*| <= 1e-10 in the chart where each point was computed."""
        for mid in EQUAL_DEGREE:
            m = instantiate(mid, default_params(mid))
            pm = homogenize(fixed_point_map(m))
            a = pm.components[1].restrict_infinity()
            b = pm.components[2].restrict_infinity()
            for p in infinity_fixed_points(pm):
                z1, z2 = p.point
                if abs(z1) >= abs(z2):
                    u = z2 / z1
                    g = b.dehom_u()(u) / a.dehom_u()(u)
                else:
                    u = z1 / z2
                    g = a.dehom_v()(u) / b.dehom_v()(u)
                assert abs(g - u) <= 1e-10

    def test_unequal_degrees_refused(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        with pytest.raises(UnequalDegrees) as err:
            infinity_fixed_points(homogenize(fixed_point_map(m)))
        assert len(err.value.indeterminacy) == 1


class TestLefschetzTotal:
    def test_hyperbolic_lensing_fixture(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC_LENSING,
                        ControlParams(y=(0.0, 0.0), p=1.0))
        rep = lefschetz_total(m)
        assert abs(rep.affine_sum) <= 1e-8
        assert abs(rep.infinity_sum - 1.0) <= 1e-8
        assert abs(rep.total - 1.0) <= 1e-8

    def test_elliptic_umbilic_fixture(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=3.0))
        rep = lefschetz_total(m)
        assert rep.n_images == 4
        assert abs(rep.affine_sum) <= 1e-8
        assert abs(rep.infinity_sum - 1.0) <= 1e-8
        assert abs(rep.total - 1.0) <= 1e-8

    def test_hyperbolic_umbilic_random_sources(self):
        rng = np.random.default_rng(23)
        done = 0
        while done < 100:
            y = tuple(rng.uniform(-4, 2, 2))
            m = instantiate(ModelId.HYPERBOLIC_UMBILIC, ControlParams(y=y, c=1.0))
            try:
                rep = lefschetz_total(m)
            except CausticSource:
                continue
            done += 1
            assert abs(rep.total - 1.0) <= 1e-8

    def test_unequal_degree_refused(self):
        m = instantiate(ModelId.CUSP, ControlParams(y=(-3.0, 0.0)))
        with pytest.raises(UnequalDegrees):
            lefschetz_total(m)


class TestRationalFixedPointTheorem:
    def test_squaring_map(self):
        # fixed points {0, 1, inf}: indices {1, -1, 1}
        total = rational_fixed_point_check(UniPoly((0.0, 0.0, 1.0)))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_cubing_map(self):
        # roots of u^3 - u: {0, 1, -1}, multipliers {0, 3, 3}
        total = rational_fixed_point_check(UniPoly((0.0, 0.0, 0.0, 1.0)))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_quadratic_family(self):
        rng = np.random.default_rng(24)
        for _ in range(100):
            c = complex(*rng.uniform(-2, 2, 2))
            total = rational_fixed_point_check(UniPoly((c, 0.0, 1.0)))
            assert abs(total - 1.0) <= 1e-10

    def test_degenerate_multiplier(self):
        # u^2 + 1/4 has a double fixed point at 1/2 with multiplier 1
        with pytest.raises(DegenerateMultiplier):
            rational_fixed_point_check(UniPoly((0.25, 0.0, 1.0)))

    def test_degree_one_rejected(self):
        with pytest.raises(ValueError):
            rational_fixed_point_check(UniPoly((1.0, 0.5)))

    def test_random_maps_degree_2_to_5(self):
        rng = np.random.default_rng(25)
        done = 0
        while done < 300:
            deg = int(rng.integers(2, 6))
            cs = rng.uniform(-1, 1, deg + 1) + 1j * rng.uniform(-1, 1, deg + 1)
            if abs(cs[-1]) < 0.3:
                continue
            try:
                total = rational_fixed_point_check(UniPoly(tuple(cs)), tol=0.05)
            except DegenerateMultiplier:
                continue
            done += 1
            assert abs(total - 1.0) <= 1e-10
