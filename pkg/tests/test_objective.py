import math
from dataclasses import replace

import numpy as np
import pytest

from ctrlscore import (
    CtrlscoreError,
    InfeasiblePointError,
    ObjectiveKind,
    evaluate,
    feasibility,
    gradient,
    gramian_basis_finite,
    gramian_basis_infinite,
    hessian,
    make_system,
)
from ctrlscore.oracle import finite_difference_gradient
from helpers import interior_point, rotation_system, stable_random_system

VOL = ObjectiveKind.VOLUMETRIC
AVG = ObjectiveKind.AVERAGE_ENERGY


@pytest.fixture
def cascade_basis(cascade):
    return gramian_basis_infinite(cascade)


@pytest.fixture
def eye2_basis():
    return gramian_basis_infinite(make_system(-np.eye(2)))


class TestFeasibility:
    def test_boundary_point_infeasible(self, cascade_basis):
        assert feasibility(cascade_basis, [0.0, 1.0]) is None

    def test_vertex_with_full_rank_gramian_feasible(self, cascade_basis):
        L = feasibility(cascade_basis, [1.0, 0.0])
        assert L is not None
        assert np.allclose(L @ L.T, cascade_basis.assemble([1.0, 0.0]), atol=1e-14)

    def test_uniform_always_feasible_for_stable_systems(self):
        for seed in range(3):
            sys_ = stable_random_system(6, seed)
            basis = gramian_basis_infinite(sys_)
            assert feasibility(basis, np.full(6, 1 / 6)) is not None

    def test_zero_vector_infeasible(self, cascade_basis):
        assert feasibility(cascade_basis, np.zeros(2)) is None


class TestEvaluate:
    def test_volumetric_closed_form(self, eye2_basis):
        # W(p) = diag(1/4, 1/4): -log det = log 16
        assert evaluate(VOL, eye2_basis, [0.5, 0.5]) == pytest.approx(
            math.log(16.0), abs=1e-12
        )

    def test_average_energy_closed_form(self, eye2_basis):
        assert evaluate(AVG, eye2_basis, [0.5, 0.5]) == pytest.approx(8.0, abs=1e-12)

    def test_cascade_interior_value(self, cascade_basis):
        # det W(p) = p1/4 - 3 p1^2/16 = 1/12 at p1 = 2/3
        value = evaluate(VOL, cascade_basis, [2.0 / 3.0, 1.0 / 3.0])
        assert value == pytest.approx(-math.log(1.0 / 12.0), abs=1e-12)

    def test_infeasible_evaluates_to_inf(self, cascade_basis):
        assert evaluate(VOL, cascade_basis, [0.0, 1.0]) == math.inf
        assert evaluate(AVG, cascade_basis, [0.0, 1.0]) == math.inf


class TestGradient:
    def test_decoupled_volumetric(self):
        basis = gramian_basis_infinite(make_system(-np.eye(2)))
        g = gradient(VOL, basis, [0.5, 0.5])
        assert np.allclose(g, [-2.0, -2.0], atol=1e-12)

    def test_decoupled_average_energy(self):
        basis = gramian_basis_infinite(make_system(-np.eye(2)))
        g = gradient(AVG, basis, [0.5, 0.5])
        assert np.allclose(g, [-8.0, -8.0], atol=1e-12)

    @pytest.mark.parametrize("kind", [VOL, AVG])
    def test_matches_finite_differences(self, kind):
        sys_ = stable_random_system(6, seed=51)
        basis = gramian_basis_infinite(sys_)
        rng = np.random.default_rng(4)
        p = interior_point(6, rng)
        analytic = gradient(kind, basis, p)
        approx = finite_difference_gradient(kind, basis, p, h=1e-5)
        rel = np.linalg.norm(analytic - approx) / np.linalg.norm(analytic)
        assert rel <= 1e-6

    @pytest.mark.parametrize("kind", [VOL, AVG])
    def test_finite_horizon_gradient_matches_differences(self, kind):
        sys_ = stable_random_system(5, seed=52)
        basis = gramian_basis_finite(sys_, 1.4)
        rng = np.random.default_rng(5)
        p = interior_point(5, rng)
        analytic = gradient(kind, basis, p)
        approx = finite_difference_gradient(kind, basis, p, h=1e-5)
        rel = np.linalg.norm(analytic - approx) / np.linalg.norm(analytic)
        assert rel <= 1e-6

    def test_every_component_negative(self):
        for seed in range(5):
            sys_ = stable_random_system(5, seed=60 + seed)
            basis = gramian_basis_infinite(sys_)
            p = interior_point(5, np.random.default_rng(seed))
            for kind in (VOL, AVG):
                assert gradient(kind, basis, p).max() < 0.0

    def test_infeasible_point_raises(self, cascade_basis):
        with pytest.raises(InfeasiblePointError):
            gradient(VOL, cascade_basis, [0.0, 1.0])


class TestHessian:
    def test_decoupled_volumetric_diag(self):
        basis = gramian_basis_infinite(make_system(-np.eye(3)))
        p = np.array([0.2, 0.3, 0.5])
        assert np.allclose(hessian(VOL, basis, p), np.diag(1.0 / p**2), atol=1e-12)

    def test_decoupled_average_energy_diag(self):
        basis = gramian_basis_infinite(make_system(-np.eye(3)))
        p = np.array([0.2, 0.3, 0.5])
        assert np.allclose(hessian(AVG, basis, p), np.diag(4.0 / p**3), atol=1e-11)

    def test_quadratic_form_trace_identity(self):
        # x^T H x = tr(G^2) with G = W(p)^{-1/2} W(x) W(p)^{-1/2}
        sys_ = stable_random_system(5, seed=71)
        basis = gramian_basis_infinite(sys_)
        rng = np.random.default_rng(9)
        p = interior_point(5, rng)
        H = hessian(VOL, basis, p)
        W = basis.assemble(p)
        lam, V = np.linalg.eigh(W)
        W_inv_half = V @ np.diag(lam**-0.5) @ V.T
        for _ in range(10):
            x = rng.normal(size=5)
            G = W_inv_half @ basis.assemble(x) @ W_inv_half
            lhs = float(x @ H @ x)
            rhs = float(np.trace(G @ G))
            assert abs(lhs - rhs) <= 1e-8 * max(abs(rhs), 1.0)

    @pytest.mark.parametrize("kind", [VOL, AVG])
    def test_positive_definite_at_random_points(self, kind):
        rng = np.random.default_rng(81)
        for seed in range(5):
            n = int(rng.integers(3, 8))
            basis = gramian_basis_infinite(stable_random_system(n, seed=90 + seed))
            p = interior_point(n, rng)
            assert np.linalg.eigvalsh(hessian(kind, basis, p)).min() > 0.0

    def test_requires_explicit_basis(self):
        basis = gramian_basis_infinite(stable_random_system(5, seed=1), mode="adjoint")
        with pytest.raises(CtrlscoreError, match="explicit"):
            hessian(VOL, basis, np.full(5, 0.2))

    def test_size_cap(self):
        basis = gramian_basis_infinite(stable_random_system(6, seed=2))
        with pytest.raises(CtrlscoreError, match="capped"):
            hessian(VOL, basis, np.full(6, 1 / 6), size_cap=4)


class TestFiniteHorizonDegeneracy:
    def test_rotation_objective_constant_at_quarter_period(self):
        # At T = pi the two Gramians coincide, so the volumetric objective
        # is the same at every simplex point.
        basis = gramian_basis_finite(rotation_system(), math.pi)
        points = [[1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [0.25, 0.75]]
        values = [evaluate(VOL, basis, p) for p in points]
        assert max(values) - min(values) <= 1e-8


class TestScaleRelations:
    def test_scaling_basis_shifts_volumetric_and_scales_energy(self):
        sys_ = stable_random_system(4, seed=101)
        basis = gramian_basis_infinite(sys_)
        c = 2.75
        scaled = replace(basis, matrices=c * basis.matrices)
        rng = np.random.default_rng(11)
        p = interior_point(4, rng)
        f0, f1 = evaluate(VOL, basis, p), evaluate(VOL, scaled, p)
        assert f1 == pytest.approx(f0 - 4 * math.log(c), abs=1e-10)
        g0, g1 = evaluate(AVG, basis, p), evaluate(AVG, scaled, p)
        assert g1 == pytest.approx(g0 / c, rel=1e-12)
        H0, H1 = hessian(VOL, basis, p), hessian(VOL, scaled, p)
        assert np.abs(H0 - H1).max() <= 1e-9 * np.abs(H0).max()
