import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from fastdrive import generators as gen
from fastdrive.fast import (
    UNITS,
    JumpProtocol,
    OperatorModel,
    SampledProtocol,
    b_matrix,
    constancy_integrand,
    constant_protocol,
    excess_work_fast,
    g_matrix,
    ifrr,
    linear_protocol,
    power_integrand,
    relaxation_closed_form,
    savings,
    unitary_closed_form,
    unitary_savings_integrands,
    variance_fast,
)
from fastdrive.family import Boundary, HamiltonianFamily, gibbs_state, quench_relative_entropy
from fastdrive.models.dot import DotModel
from fastdrive.models.qubit import qubit_family
from fastdrive.operators import DomainError

from strategies import betas, hermitian_from, seeds


def family(seed, dim=3, d=2, beta=1.0, with_h0=True):
    h0 = hermitian_from(seed, dim) if with_h0 else np.zeros((dim, dim))
    return HamiltonianFamily(h0, tuple(hermitian_from(seed + 1 + j, dim) for j in range(d)), beta)


def model(seed, kind, beta=1.0, with_h0=True, tau=1.0):
    fam = family(seed, beta=beta, with_h0=with_h0)
    spec = gen.GeneratorSpec(kind, fam, 0.8 if kind == gen.RELAXATION else None)
    rng = np.random.default_rng(seed)
    return OperatorModel(spec, Boundary(rng.normal(size=2), rng.normal(size=2), tau))


def _cross(m, u):
    """``i <[H_B, H_u]>_A`` computed directly from the operators."""
    fam = m.spec.family
    pi_a = gibbs_state(fam, m.boundary.lambda_a)
    hb, hu = fam.combine(m.boundary.lambda_b), fam.combine(u)
    return float((1j * np.trace((hb @ hu - hu @ hb) @ pi_a)).real)


kinds = st.sampled_from([gen.UNITARY, gen.RELAXATION])


class TestProtocols:
    def test_jump_path_is_constant(self):
        p = JumpProtocol(Boundary([0.0], [1.0], 2.0), [0.4])
        assert p.tau == 2.0
        assert np.allclose(p.path(1.3), [0.4])
        assert np.allclose(p.velocity(0.2), 0)

    def test_linear_protocol_path_and_velocity(self):
        bd = Boundary([0.0, 1.0], [2.0, -1.0], 4.0)
        p = linear_protocol(bd, nodes=5)
        assert np.allclose(p.path(1.0), [0.5, 0.5])
        assert np.allclose(p.velocity(3.9), [0.5, -0.5])

    def test_sampled_validation(self):
        bd = Boundary([0.0], [1.0], 1.0)
        with pytest.raises(DomainError):
            SampledProtocol(bd, [0.0, 0.5, 0.4, 1.0], [0, 0, 0, 0])
        with pytest.raises(DomainError):
            SampledProtocol(bd, [0.0, 0.9], [0, 0])
        with pytest.raises(DomainError):
            SampledProtocol(bd, [0.0, 1.0], [0, np.nan])
        with pytest.raises(DomainError):
            SampledProtocol(bd, [0.0, 1.0], [[0, 1], [0, 1]])


class TestCoefficientRoutes:
    @given(seeds, kinds, betas)
    def test_model_matches_module_functions(self, seed, kind, beta):
        m = model(seed, kind, beta)
        lam = np.random.default_rng(seed + 3).normal(size=2)
        la = m.boundary.lambda_a
        assert np.allclose(m.ifrr(lam), ifrr(m.spec, lam, la), atol=1e-12)
        assert np.allclose(m.g_matrix(lam), g_matrix(m.spec, lam, la), atol=1e-12)
        assert np.allclose(m.b_matrix(lam), b_matrix(m.spec, lam, la), atol=1e-12)
        assert np.allclose(b_matrix(m.spec, lam, la, symmetrize=True), m.coefficients(lam).b_sym, atol=1e-12)

    @given(seeds, betas)
    def test_relaxation_closed_form(self, seed, beta):
        m = model(seed, gen.RELAXATION, beta)
        lam = np.random.default_rng(seed + 5).normal(size=2)
        closed = relaxation_closed_form(m.spec, lam, m.boundary.lambda_a)
        assert np.allclose(closed.r, m.ifrr(lam), atol=1e-10)
        assert np.allclose(closed.g, m.g_matrix(lam), atol=1e-10)
        assert np.allclose(closed.b, m.b_matrix(lam), atol=1e-10)

    @given(seeds, betas)
    def test_unitary_closed_form(self, seed, beta):
        m = model(seed, gen.UNITARY, beta)
        lam = np.random.default_rng(seed + 5).normal(size=2)
        closed = unitary_closed_form(m.spec, lam, m.boundary.lambda_a)
        assert np.allclose(closed.r, m.ifrr(lam), atol=1e-10)
        assert np.allclose(closed.g, m.g_matrix(lam), atol=1e-10)
        assert np.allclose(closed.b, m.b_matrix(lam), atol=1e-10)

    @given(seeds, betas)
    def test_unitary_integrands_in_hamiltonian_form(self, seed, beta):
        m = model(seed, gen.UNITARY, beta)
        lam = np.random.default_rng(seed + 9).normal(size=2)
        p, c = unitary_savings_integrands(m.spec, m.boundary, lam)
        assert p == pytest.approx(power_integrand(m, lam), abs=1e-10)
        assert c == pytest.approx(constancy_integrand(m, lam), abs=1e-9)

    def test_closed_forms_reject_wrong_generator(self):
        m = model(1, gen.UNITARY)
        with pytest.raises(DomainError):
            relaxation_closed_form(m.spec, [0, 0], m.boundary.lambda_a)
        r = model(1, gen.RELAXATION)
        with pytest.raises(DomainError):
            unitary_closed_form(r.spec, [0, 0], r.boundary.lambda_a)

    def test_relaxation_coefficients_vanish_at_start(self):
        m = model(2, gen.RELAXATION)
        la = m.boundary.lambda_a
        assert np.allclose(m.ifrr(la), 0, atol=1e-12)
        assert np.allclose(m.g_matrix(la), 0, atol=1e-12)

    @given(seeds, kinds)
    def test_g_is_symmetric(self, seed, kind):
        m = model(seed, kind)
        g = m.g_matrix(np.random.default_rng(seed).normal(size=2))
        assert np.allclose(g, g.T)


class TestIntegrands:
    @given(seeds, kinds)
    def test_no_savings_when_jumping_to_an_endpoint(self, seed, kind):
        m = model(seed, kind)
        for point in (m.boundary.lambda_a, m.boundary.lambda_b):
            assert power_integrand(m, point) == pytest.approx(0, abs=1e-10)
            assert constancy_integrand(m, point) == pytest.approx(0, abs=1e-10)

    @given(seeds, st.floats(-2, 2), st.floats(-2, 2))
    def test_unitary_savings_vanish_on_endpoint_span(self, seed, a, b):
        # With H0 = 0 every H on the span of the endpoints is a + b combination of H_A and H_B.
        m = model(seed, gen.UNITARY, with_h0=False)
        lam = a * m.boundary.lambda_a + b * m.boundary.lambda_b
        scale = 1 + np.linalg.norm(lam) ** 3
        assert abs(power_integrand(m, lam)) < 1e-10 * scale
        assert abs(constancy_integrand(m, lam)) < 1e-9 * scale

    @given(seeds, st.floats(-2, 2), st.floats(-2, 2))
    def test_unitary_power_linear_off_span(self, seed, s, a):
        # With H0 = 0, p(a lam_B + s u) = s p(u) for u orthogonal to the endpoint span.
        fam = family(seed, d=3, with_h0=False)
        rng = np.random.default_rng(seed)
        bd = Boundary(rng.normal(size=3), rng.normal(size=3), 1.0)
        m = OperatorModel(gen.GeneratorSpec(gen.UNITARY, fam), bd)
        q, _ = np.linalg.qr(np.column_stack([bd.lambda_a, bd.lambda_b, rng.normal(size=3)]))
        u = q[:, 2]
        lhs = power_integrand(m, a * bd.lambda_b + s * u)
        scale = 1 + abs(a) * abs(s)
        assert power_integrand(m, u) == pytest.approx(_cross(m, u), abs=1e-12)
        assert lhs == pytest.approx(s * power_integrand(m, u), abs=1e-10 * scale)

    def test_dimension_checked(self):
        m = model(1, gen.RELAXATION)
        with pytest.raises(DomainError):
            power_integrand(m, [0.0])


class TestFunctionals:
    def test_jump_average_is_pointwise(self):
        m = model(4, gen.RELAXATION, tau=0.3)
        point = [0.2, -0.4]
        rep = savings(m, JumpProtocol(m.boundary, point))
        assert rep.p_save == pytest.approx(power_integrand(m, point))
        assert rep.c_save == pytest.approx(constancy_integrand(m, point))
        assert rep.w_ex_approx == pytest.approx(m.quench_work() - 0.3 * rep.p_save)
        assert rep.var_approx == pytest.approx(m.quench_var() - 0.3 * rep.c_save)
        assert rep.protocol == "jump"

    @given(seeds, kinds)
    def test_velocity_independence(self, seed, kind):
        # Holding at a point on a sampled grid gives the jump value whatever the grid.
        m = model(seed, kind, tau=0.5)
        point = np.random.default_rng(seed).normal(size=2)
        jump = savings(m, JumpProtocol(m.boundary, point))
        for nodes in (3, 9):
            held = savings(m, constant_protocol(m.boundary, point, nodes))
            assert held.p_save == pytest.approx(jump.p_save, rel=1e-12, abs=1e-14)
            assert held.c_save == pytest.approx(jump.c_save, rel=1e-12, abs=1e-14)

    def test_reparametrized_path_changes_only_through_dwell_times(self):
        # Same geometric path, different speed profile: Simpson of p(lam(t)) equals the
        # integral over the path weighted by dwell time, checked against adaptive quadrature.
        dot = DotModel(beta=2.0, eps_b=3.0, tau_eq=1.0, tau=1.0)
        m = dot.operator_model()
        t = np.linspace(0, 1, 201)
        lam = 3.0 * t**2
        rep = savings(m, SampledProtocol(m.boundary, t, lam))
        ref = quad(lambda u: power_integrand(m, [3.0 * u**2]), 0, 1, epsabs=1e-13)[0]
        assert rep.p_save == pytest.approx(ref, rel=1e-7)

    def test_linear_protocol_against_adaptive_quadrature(self):
        dot = DotModel(beta=1.5, eps_b=2.0, tau_eq=0.7, tau=0.1)
        m = dot.operator_model()
        rep = savings(m, linear_protocol(m.boundary, 129))
        ref_p = quad(lambda s: power_integrand(m, [2.0 * s]), 0, 1, epsabs=1e-13)[0]
        ref_c = quad(lambda s: constancy_integrand(m, [2.0 * s]), 0, 1, epsabs=1e-13)[0]
        assert rep.p_save == pytest.approx(ref_p, rel=1e-8)
        assert rep.c_save == pytest.approx(ref_c, rel=1e-8)
        assert excess_work_fast(m, linear_protocol(m.boundary, 129)) == pytest.approx(rep.w_ex_approx)
        assert variance_fast(m, linear_protocol(m.boundary, 129)) == pytest.approx(rep.var_approx)

    def test_quench_baselines(self):
        m = model(3, gen.RELAXATION, beta=0.6)
        s = quench_relative_entropy(m.spec.family, m.boundary.lambda_a, m.boundary.lambda_b)
        assert m.quench_work() == pytest.approx(s / 0.6)
        assert m.quench_var() == pytest.approx(m.relative_entropy_variance / 0.36)

    def test_boundary_mismatch_and_grid_size(self):
        m = model(3, gen.RELAXATION)
        other = Boundary(m.boundary.lambda_a + 1, m.boundary.lambda_b, 1.0)
        with pytest.raises(DomainError):
            savings(m, JumpProtocol(other, [0, 0]))
        with pytest.raises(DomainError):
            savings(m, linear_protocol(m.boundary, 2))

    def test_model_dimension_check(self):
        spec = gen.GeneratorSpec(gen.UNITARY, qubit_family())
        with pytest.raises(DomainError):
            OperatorModel(spec, Boundary([0.0], [1.0], 1.0))

    def test_report_carries_units(self):
        m = model(3, gen.RELAXATION)
        d = savings(m, JumpProtocol(m.boundary, [0, 0])).to_dict()
        assert d["units"] == UNITS
        assert d["units"]["hbar"] == 1.0 and d["units"]["k_B"] == 1.0

    def test_delta_h_and_timescale(self):
        spec = gen.GeneratorSpec(gen.UNITARY, qubit_family(1.0))
        m = OperatorModel(spec, Boundary([1, 0, 0], [0, 0, 1], 1.0))
        # ||H(0) - H_A||_1 = 2, ||H_B - H(0)||_1 = 2.
        assert m.delta_h([0, 0, 0]) == pytest.approx(4.0)
        assert m.timescale() == pytest.approx(0.5)
        assert m.force_scale() == pytest.approx(1.0)
        assert gibbs_state(spec.family, [0, 0, 0]).trace() == pytest.approx(1.0)
