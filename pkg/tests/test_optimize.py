import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fastdrive import generators as gen
from fastdrive.fast import OperatorModel, constancy_integrand, linear_protocol, power_integrand, savings
from fastdrive.family import Boundary
from fastdrive.models.dot import DotModel, dot_optimal_points
from fastdrive.models.qubit import QubitModel, qubit_family
from fastdrive.operators import DomainError
from fastdrive.optimize import (
    ConvergenceWarning,
    Objective,
    OptimizationProblem,
    default_unitary_radius,
    el_residual_constancy,
    el_residual_power,
    fd_gradient,
    fd_hessian,
    max_savings,
    objective_value,
    pareto_front,
    pareto_scale,
    solve_jump,
    validity_check,
)


@pytest.fixture(scope="module")
def dot():
    return DotModel.from_beta_eps(50.0, eps_b=1.0, tau_eq=1.0, tau=0.01)


class TestFiniteDifferences:
    def test_quadratic(self):
        a = np.array([[-2.0, 0.5], [0.5, -1.0]])
        f = lambda x: 0.5 * x @ a @ x + x.sum()  # noqa: E731
        x = np.array([0.3, -1.2])
        assert np.allclose(fd_gradient(f, x), a @ x + 1, atol=1e-9)
        assert np.allclose(fd_hessian(f, x), a, atol=1e-6)

    @given(st.floats(-5, 5), st.floats(0.1, 3))
    def test_gradient_of_sine(self, x, k):
        g = fd_gradient(lambda v: np.sin(k * v[0]), np.array([x]))
        assert g[0] == pytest.approx(k * np.cos(k * x), abs=1e-8)


class TestObjective:
    def test_validation(self):
        with pytest.raises(DomainError):
            Objective("entropy")
        with pytest.raises(DomainError):
            Objective.pareto(1.5)

    def test_weights_and_labels(self):
        assert Objective.power().power_weight == 1.0
        assert Objective.constancy().power_weight == 0.0
        assert Objective.pareto(0.3).power_weight == 0.3
        assert Objective.pareto(0.3, raw=True).label() == "pareto(w=0.3, raw)"

    def test_pareto_value_is_scaled_mixture(self, dot):
        m = dot.operator_model()
        lam = [0.2]
        s = pareto_scale(m)
        assert s == pytest.approx(m.quench_var() / m.quench_work())
        expected = 0.4 * power_integrand(m, lam) + 0.6 * constancy_integrand(m, lam) / s
        assert objective_value(m, Objective.pareto(0.4), lam) == pytest.approx(expected)
        raw = 0.4 * power_integrand(m, lam) + 0.6 * constancy_integrand(m, lam)
        assert objective_value(m, Objective.pareto(0.4, raw=True), lam) == pytest.approx(raw)

    def test_pareto_scale_fallback(self):
        spec = gen.GeneratorSpec(gen.RELAXATION, qubit_family(), 1.0)
        m = OperatorModel(spec, Boundary([1, 0, 0], [1, 0, 0], 1.0))
        assert m.quench_work() == pytest.approx(0, abs=1e-14)
        assert pareto_scale(m) == 1.0


class TestProblem:
    def test_default_box_pads_endpoints(self, dot):
        prob = OptimizationProblem(dot.operator_model())
        assert np.allclose(prob.search_box, [[-0.25, 1.25]])

    def test_degenerate_endpoints_still_get_a_box(self):
        spec = gen.GeneratorSpec(gen.RELAXATION, qubit_family(), 1.0)
        prob = OptimizationProblem(OperatorModel(spec, Boundary([1, 0, 0], [1, 0, 0], 1.0)))
        assert np.allclose(prob.search_box[:, 1] - prob.search_box[:, 0], 0.5)

    def test_unitary_defaults_to_ball(self):
        m = QubitModel().operator_model()
        prob = OptimizationProblem(m)
        assert prob.search_box is None
        assert prob.max_norm == pytest.approx(default_unitary_radius(m)) == pytest.approx(0.1)

    def test_validation(self, dot):
        m = dot.operator_model()
        with pytest.raises(DomainError):
            OptimizationProblem(m, search_box=[[1.0, 0.0]])
        with pytest.raises(DomainError):
            OptimizationProblem(m, max_norm=-1.0)
        with pytest.raises(DomainError):
            OptimizationProblem(m, starts=0)

    def test_projection(self, dot):
        prob = OptimizationProblem(dot.operator_model(), search_box=[[0.0, 1.0]])
        assert np.allclose(prob.project([2.0]), [1.0])
        ball = OptimizationProblem(QubitModel().operator_model(), max_norm=1.0)
        assert np.linalg.norm(ball.project([3.0, 4.0, 0.0])) == pytest.approx(1.0)


class TestDotOptima:
    @pytest.mark.parametrize("be", [10.0, 50.0])
    def test_power_optimum_matches_transcendental_root(self, be):
        m = DotModel.from_beta_eps(be).operator_model()
        sol = solve_jump(OptimizationProblem(m, Objective.power()))
        xi = dot_optimal_points(DotModel.from_beta_eps(be)).xi
        assert sol.converged
        assert sol.optimum[0] == pytest.approx(xi, rel=1e-6)
        assert np.linalg.norm(el_residual_power(m, sol.optimum)) < 1e-6

    def test_constancy_optimum_is_half_gap(self, dot):
        sol = solve_jump(OptimizationProblem(dot.scalar_model(), Objective.constancy()))
        assert sol.converged
        assert sol.optimum[0] == pytest.approx(0.5, rel=1e-6)
        assert sol.objective_value == pytest.approx(1 / 8, rel=1e-9)
        assert abs(el_residual_constancy(dot.scalar_model(), [0.5])[0]) < 1e-8

    def test_operator_and_scalar_paths_agree(self, dot):
        a = solve_jump(OptimizationProblem(dot.operator_model(), Objective.power()))
        b = solve_jump(OptimizationProblem(dot.scalar_model(), Objective.power()))
        assert a.optimum[0] == pytest.approx(b.optimum[0], rel=1e-8)

    def test_optimized_jumps_dominate_linear_ramp(self, dot):
        m = dot.scalar_model()
        lin = savings(m, linear_protocol(m.boundary, 2001))
        p = solve_jump(OptimizationProblem(m, Objective.power()))
        c = solve_jump(OptimizationProblem(m, Objective.constancy()))
        assert p.savings.p_save > lin.p_save
        assert c.savings.c_save > lin.c_save

    def test_box_limited_solution(self, dot):
        sol = solve_jump(OptimizationProblem(dot.scalar_model(), Objective.constancy(), search_box=[[0.0, 0.3]]))
        assert sol.box_limited
        assert sol.optimum[0] == pytest.approx(0.3)

    def test_deterministic_and_parallel_consistent(self, dot):
        m = dot.operator_model()
        a = solve_jump(OptimizationProblem(m, Objective.pareto(0.5), seed=3))
        b = solve_jump(OptimizationProblem(m, Objective.pareto(0.5), seed=3, jobs=3))
        assert np.array_equal(a.optimum, b.optimum)
        assert a.to_dict() == b.to_dict()

    def test_nonconvergence_warns(self, dot):
        with pytest.warns(ConvergenceWarning):
            sol = solve_jump(OptimizationProblem(dot.operator_model(), Objective.power(), max_iter=1, starts=1,
                                                 scan_points=3))
        assert not sol.converged

    def test_max_savings(self, dot):
        m = dot.scalar_model()
        ms = max_savings(m, [0.09], [0.5])
        assert ms.c_lam == pytest.approx(1 / 8)
        assert ms.p_lam == pytest.approx(power_integrand(m, [0.5]))
        assert max_savings(m, [0.5]).p_xi == ms.p_lam


class TestPareto:
    def test_monotone_front_with_matching_endpoints(self, dot):
        m = dot.operator_model()
        weights = [0.0, 0.25, 0.5, 0.75, 1.0]
        front = pareto_front(m, weights)
        p = [s.savings.p_save for s in front]
        c = [s.savings.c_save for s in front]
        assert all(s.converged for s in front)
        assert np.all(np.diff(p) >= -1e-9 * max(p))
        assert np.all(np.diff(c) <= 1e-9 * max(c))
        pure_p = solve_jump(OptimizationProblem(m, Objective.power()))
        pure_c = solve_jump(OptimizationProblem(m, Objective.constancy()))
        assert front[-1].optimum[0] == pytest.approx(pure_p.optimum[0], rel=1e-6)
        assert front[0].optimum[0] == pytest.approx(pure_c.optimum[0], rel=1e-6)

    def test_raw_and_scaled_fronts_share_endpoints(self, dot):
        m = dot.scalar_model()
        scaled = pareto_front(m, [0.0, 1.0])
        raw = pareto_front(m, [0.0, 1.0], raw=True)
        assert raw[1].pareto_scale == 1.0
        for a, b in zip(scaled, raw):
            assert a.optimum[0] == pytest.approx(b.optimum[0], rel=1e-6)

    def test_qubit_front_is_collinear(self):
        # The power and constancy savings share one direction, so every weight picks the same point.
        m = QubitModel().operator_model()
        front = pareto_front(m, [0.0, 0.5, 1.0])
        for sol in front:
            assert np.allclose(sol.optimum, front[0].optimum, atol=1e-6 * 0.1)


class TestUnitary:
    def test_power_optimum_along_cross_product(self):
        m = QubitModel().operator_model()
        sol = solve_jump(OptimizationProblem(m, Objective.power()))
        assert sol.converged and sol.box_limited
        radius = default_unitary_radius(m)
        # Savings are positive along +alpha (x_hat cross z_hat) = -y_hat.
        assert np.allclose(sol.optimum, [0.0, -radius, 0.0], atol=1e-7)
        assert sol.savings.p_save > 0 and sol.savings.c_save > 0

    def test_random_boundary_optimum_is_orthogonal_to_endpoints(self):
        rng = np.random.default_rng(5)
        la, lb = rng.normal(size=3), rng.normal(size=3)
        m = QubitModel(lambda_a=la, lambda_b=lb).operator_model()
        sol = solve_jump(OptimizationProblem(m, Objective.power(), max_norm=0.05))
        u = sol.optimum / np.linalg.norm(sol.optimum)
        assert abs(u @ la) < 1e-6 * np.linalg.norm(la)
        assert abs(u @ lb) < 1e-6 * np.linalg.norm(lb)


class TestValidity:
    def test_flag_and_ratio(self, dot):
        m = dot.operator_model()
        rep = validity_check(m, [0.5])
        assert rep.tau_c == pytest.approx(0.5)
        assert rep.tau_over_tau_c == pytest.approx(0.02)
        assert not rep.warning
        assert validity_check(m, [0.5], tau=0.2).warning

    def test_delta_h_of_dot(self, dot):
        # H = eps sigma_z / 2, so ||H(0.5) - H(0)||_1 = 0.5, ||H(1) - H(0.5)||_1 = 0.5.
        assert validity_check(dot.operator_model(), [0.5]).delta_h == pytest.approx(1.0)

    def test_scalar_models_report_nan_delta_h(self, dot):
        rep = validity_check(dot.scalar_model(), [0.5])
        assert np.isnan(rep.delta_h)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert rep.tau_c == pytest.approx(0.5)
