"""Model catalog: maps, potentials, Jacobians, Hessians, elimination."""

import math

import numpy as np
import pytest

from lenslef import catalog
from lenslef.catalog import ControlParams, ModelId, instantiate
from lenslef.errors import DegenerateParameters, InvalidParams
from lenslef.polycore import UniPoly, aberth_roots, newton_polish2


def default_params(mid, y=(0.3, 0.4)):
    if mid in catalog.C_MODELS:
        return ControlParams(y=y, c=1.5)
    if mid in catalog.P_MODELS:
        return ControlParams(y=y, p=1.0)
    return ControlParams(y=y)


ALL_MODELS = list(ModelId)


class TestInstantiate:
    def test_fold_exact(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        assert m.eta[0].terms == {(1, 0): 1.0 + 0j}
        assert m.eta[1].terms == {(0, 2): 1.0 + 0j}
        assert m.degrees == (1, 2)
        assert m.bezout == 2

    def test_hyperbolic_umbilic_exact(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=1.0))
        assert m.eta[0].terms == {(2, 0): -3.0 + 0j, (0, 1): -1.0 + 0j}
        assert m.eta[1].terms == {(0, 2): -3.0 + 0j, (1, 0): -1.0 + 0j}
        assert m.degrees == (2, 2)
        assert m.bezout == 4

    def test_cusp_exact(self):
        m = instantiate(ModelId.CUSP, ControlParams(y=(-3.0, 0.0)))
        assert m.eta[0].terms == {(1, 0): 1.0 + 0j}
        assert m.eta[1].terms == {(1, 1): 1.0 + 0j, (0, 3): 1.0 + 0j}
        assert m.degrees == (1, 3)
        assert m.bezout == 3

    def test_degree_table(self):
        expected = {
            ModelId.FOLD: ((1, 2), 2),
            ModelId.CUSP: ((1, 3), 3),
            ModelId.SWALLOWTAIL: ((4, 1), 4),
            ModelId.ELLIPTIC_UMBILIC: ((2, 2), 4),
            ModelId.HYPERBOLIC_UMBILIC: ((2, 2), 4),
            ModelId.ELLIPTIC_UMBILIC_LENSING: ((2, 2), 4),
            ModelId.HYPERBOLIC_UMBILIC_LENSING: ((2, 2), 4),
        }
        for mid in ALL_MODELS:
            m = instantiate(mid, default_params(mid))
            assert (m.degrees, m.bezout) == expected[mid]
            assert m.bezout == m.degrees[0] * m.degrees[1]
            assert m.m >= 2

    def test_invalid_params(self):
        with pytest.raises(InvalidParams):
            instantiate(ModelId.FOLD, ControlParams(y=(0, 0), c=1.0))
        with pytest.raises(InvalidParams):
            instantiate(ModelId.SWALLOWTAIL, ControlParams(y=(0, 0)))
        with pytest.raises(InvalidParams):
            instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0, 0), c=1.0, p=1.0))
        with pytest.raises(InvalidParams):
            instantiate(ModelId.HYPERBOLIC_UMBILIC_LENSING, ControlParams(y=(0, 0), c=1.0))

    def test_parse_rejects_unknown(self):
        with pytest.raises(InvalidParams):
            ModelId.parse("parabolic-umbilic")


class TestFermatPotential:
    def test_fold_origin(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 0.0)))
        assert catalog.fermat_potential(m, (0.0, 0.0)) == 0.0

    def test_fold_hand_value(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        assert catalog.fermat_potential(m, (0.0, 1.0)) == pytest.approx(2.0 / 3.0, abs=1e-15)

    def test_elliptic_umbilic_hand_value(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=3.0))
        assert catalog.fermat_potential(m, (1.0, 0.0)) == pytest.approx(4.0, abs=1e-15)


class TestGradientCheck:
    def test_fold_solution(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        assert catalog.gradient_check(m, (0.0, 1.0)) < 1e-9

    def test_elliptic_umbilic_solution(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=3.0))
        assert catalog.gradient_check(m, (-2.0, 0.0)) < 1e-9

    def test_cusp_solution(self):
        m = instantiate(ModelId.CUSP, ControlParams(y=(-3.0, 0.0)))
        assert catalog.gradient_check(m, (-3.0, math.sqrt(3.0))) < 1e-9

    def test_gradient_identity_random(self):
        """FD gradient of phi matches the stationarity rearrangement of
        eta - y everywhere, not just at solutions."""
        rng = np.random.default_rng(5)
        for mid in ALL_MODELS:
            m = instantiate(mid, default_params(mid))
            for _ in range(100):
                x = rng.uniform(-2, 2, 2)
                assert catalog.gradient_check(m, x) < 1e-6

    def test_stationarity_equals_symbolic_gradient(self):
        """The rearrangement A(x)(eta - y) and the partials of phi are the
        same polynomial, coefficient for coefficient."""
        for mid in ALL_MODELS:
            m = instantiate(mid, default_params(mid))
            for k in (0, 1):
                assert m.stationarity[k].allclose(m.grad_phi[k], tol=1e-13)


class TestJacobian:
    def test_fold(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        mat, det = catalog.jacobian(m, (0.0, 1.0))
        assert det == pytest.approx(2.0)
        assert mat[0, 0] == 1.0 and mat[1, 1] == 2.0

    def test_hyperbolic_lensing(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC_LENSING, ControlParams(y=(0.0, 0.0), p=1.0))
        _, det = catalog.jacobian(m, (0.0, 0.0))
        assert det == pytest.approx(-4.0)

    def test_elliptic_umbilic(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=3.0))
        _, det = catalog.jacobian(m, (1.0, math.sqrt(3.0)))
        assert det == pytest.approx(-108.0)

    def test_matches_finite_differences_at_complex_points(self):
        rng = np.random.default_rng(6)
        h = 1e-6
        for mid in ALL_MODELS:
            m = instantiate(mid, default_params(mid))
            for _ in range(100):
                z = rng.uniform(-2, 2, 4)
                z1, z2 = complex(z[0], z[1]), complex(z[2], z[3])
                mat, _ = catalog.jacobian(m, (z1, z2))
                for row, comp in enumerate(m.eta):
                    fd1 = (comp(z1 + h, z2) - comp(z1 - h, z2)) / (2 * h)
                    fd2 = (comp(z1, z2 + h) - comp(z1, z2 - h)) / (2 * h)
                    assert abs(mat[row, 0] - fd1) < 1e-6 * (1 + abs(mat[row, 0]))
                    assert abs(mat[row, 1] - fd2) < 1e-6 * (1 + abs(mat[row, 1]))


class TestHessianPhi:
    def test_fold(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.0, 1.0)))
        mat, det = catalog.hessian_phi(m, (0.0, 1.0))
        assert mat[0, 0] == pytest.approx(-1.0, abs=1e-6)
        assert mat[1, 1] == pytest.approx(-2.0, abs=1e-6)
        assert det == pytest.approx(2.0, abs=1e-6)

    def test_cusp(self):
        m = instantiate(ModelId.CUSP, ControlParams(y=(-3.0, 0.0)))
        _, det = catalog.hessian_phi(m, (-3.0, 0.0))
        assert det == pytest.approx(-3.0, abs=1e-6)

    def test_elliptic_umbilic_center(self):
        m = instantiate(ModelId.ELLIPTIC_UMBILIC, ControlParams(y=(0.0, 0.0), c=3.0))
        _, det = catalog.hessian_phi(m, (0.0, 0.0))
        assert det == pytest.approx(36.0, abs=1e-4)


class TestEliminate:
    def test_fold_recipe(self):
        m = instantiate(ModelId.FOLD, ControlParams(y=(0.7, 1.3)))
        rec = catalog.eliminate(m)
        assert rec.eliminated_variable == "z1"
        assert rec.eliminant.allclose(UniPoly((-1.3, 0.0, 1.0)))
        assert rec.back_substitute(1.1, 1) == [(0.7 + 0j, 1.1)]

    def test_swallowtail_fixture(self):
        m = instantiate(ModelId.SWALLOWTAIL, ControlParams(y=(0.0, -1.0), c=0.0))
        rec = catalog.eliminate(m)
        # z^4 - z, back-substitution z2 = y2 = -1
        assert rec.eliminant.allclose(UniPoly((0.0, -1.0, 0.0, 0.0, 1.0)))
        assert rec.back_substitute(1.0, 1) == [(1.0, -1.0 + 0j)]

    def test_hyperbolic_lensing_fixture(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC_LENSING,
                        ControlParams(y=(0.0, 0.0), p=1.0))
        rec = catalog.eliminate(m)
        # z (z^3 + 8), back-substitution z2 = -z1^2 / 2
        assert rec.eliminant.allclose(UniPoly((0.0, 8.0, 0.0, 0.0, 1.0)))
        assert rec.back_substitute(-2.0, 1) == [(-2.0, -2.0 + 0j)]

    def test_hyperbolic_umbilic_needs_modulus(self):
        m = instantiate(ModelId.HYPERBOLIC_UMBILIC, ControlParams(y=(0.1, 0.2), c=0.0))
        with pytest.raises(DegenerateParameters):
            catalog.eliminate(m)

    def test_eliminant_degree_equals_bezout(self):
        rng = np.random.default_rng(8)
        for mid in ALL_MODELS:
            for _ in range(20):
                y = tuple(rng.uniform(-2, 2, 2))
                m = instantiate(mid, default_params(mid, y=y))
                rec = catalog.eliminate(m)
                assert rec.eliminant.degree == m.bezout

    def test_back_substitution_residual(self):
        """Every back-substituted eliminant root polishes to a solution."""
        rng = np.random.default_rng(9)
        for mid in ALL_MODELS:
            for _ in range(10):
                y = tuple(rng.uniform(-1.5, 1.5, 2))
                m = instantiate(mid, default_params(mid, y=y))
                rec = catalog.eliminate(m)
                r1 = m.eta[0] - y[0]
                r2 = m.eta[1] - y[1]
                total = 0
                for cl in aberth_roots(rec.eliminant):
                    pairs = rec.back_substitute(cl.value, cl.multiplicity_estimate)
                    total += len(pairs)
                    for pair in pairs:
                        res = newton_polish2(r1, r2, pair)
                        assert res.residual <= 1e-10
                assert total == m.bezout
