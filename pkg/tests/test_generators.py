import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fastdrive import generators as gen
from fastdrive.family import Boundary, HamiltonianFamily, gibbs_state, hamiltonian_at
from fastdrive.models.qubit import qubit_family
from fastdrive.operators import DomainError, random_density_matrix, random_hermitian, shifted_observable

from strategies import betas, hermitian_from, seeds


def family(seed, dim=3, beta=1.0):
    return HamiltonianFamily(hermitian_from(seed, dim), (hermitian_from(seed + 1, dim), hermitian_from(seed + 2, dim)),
                             beta)


def specs(seed, dim=3, beta=1.0):
    fam = family(seed, dim, beta)
    return [gen.GeneratorSpec(gen.UNITARY, fam), gen.GeneratorSpec(gen.RELAXATION, fam, 0.7)]


kinds = st.sampled_from([0, 1])


def test_spec_validation():
    fam = qubit_family()
    with pytest.raises(DomainError):
        gen.GeneratorSpec("davies", fam)
    with pytest.raises(DomainError):
        gen.GeneratorSpec(gen.RELAXATION, fam)
    with pytest.raises(DomainError):
        gen.GeneratorSpec(gen.RELAXATION, fam, -1.0)


def test_dimension_mismatch():
    spec = specs(1)[0]
    with pytest.raises(DomainError):
        gen.apply(spec, [0, 0], np.eye(2))
    with pytest.raises(DomainError):
        gen.apply_adjoint(spec, [0, 0], np.eye(2))


@pytest.mark.parametrize("kind", [0, 1])
def test_gibbs_state_is_fixed_point(kind):
    spec = specs(4)[kind]
    lam = [0.3, -1.1]
    assert np.allclose(gen.apply(spec, lam, gibbs_state(spec.family, lam)), 0, atol=1e-12)


def test_relaxation_from_initial_state():
    spec = specs(4)[1]
    la, lam = [0.0, 0.0], [0.5, 0.2]
    pa = gibbs_state(spec.family, la)
    expected = (gibbs_state(spec.family, lam) - pa) / spec.tau_eq
    assert np.allclose(gen.apply(spec, lam, pa), expected)


@pytest.mark.parametrize("kind", [0, 1])
def test_adjoint_annihilates_identity(kind):
    spec = specs(2)[kind]
    assert np.allclose(gen.apply_adjoint(spec, [0.1, 0.2], np.eye(3)), 0, atol=1e-12)


def test_relaxation_adjoint_on_shifted_force():
    spec = specs(6)[1]
    la = [0.2, 0.4]
    dx = shifted_observable(spec.family.forces[0], gibbs_state(spec.family, la))
    assert np.allclose(gen.apply_adjoint(spec, la, dx), -dx / spec.tau_eq, atol=1e-12)


@given(seeds, kinds, betas)
def test_trace_and_hermiticity_preservation(seed, kind, beta):
    spec = specs(seed, beta=beta)[kind]
    rho = random_density_matrix(3, np.random.default_rng(seed))
    out = gen.apply(spec, [0.4, -0.3], rho)
    assert abs(np.trace(out)) < 1e-11
    assert np.allclose(out, out.conj().T, atol=1e-12)


@given(seeds, kinds)
def test_adjoint_duality(seed, kind):
    rng = np.random.default_rng(seed)
    spec = specs(seed)[kind]
    o, rho = random_hermitian(3, rng), random_density_matrix(3, rng)
    lam = rng.normal(size=2)
    lhs = np.trace(o @ gen.apply(spec, lam, rho))
    rhs = np.trace(gen.apply_adjoint(spec, lam, o) @ rho)
    assert abs(lhs - rhs) < 1e-10


@given(seeds, kinds)
def test_superoperator_matches_apply(seed, kind):
    rng = np.random.default_rng(seed)
    spec = specs(seed)[kind]
    rho = random_density_matrix(3, rng)
    lam = rng.normal(size=2)
    via_matrix = (gen.superoperator(spec, lam) @ rho.ravel()).reshape(3, 3)
    assert np.allclose(via_matrix, gen.apply(spec, lam, rho), atol=1e-12)


def test_duality_on_random_qubit():
    rng = np.random.default_rng(3)
    spec = gen.GeneratorSpec(gen.UNITARY, qubit_family())
    o, rho = random_hermitian(2, rng), random_density_matrix(2, rng)
    lam = rng.normal(size=3)
    assert np.trace(o @ gen.apply(spec, lam, rho)) == pytest.approx(np.trace(gen.apply_adjoint(spec, lam, o) @ rho))


class TestTimescale:
    def test_relaxation_bound(self):
        spec = gen.GeneratorSpec(gen.RELAXATION, qubit_family(), 1.0)
        assert gen.characteristic_timescale(spec, Boundary([1, 0, 0], [0, 0, 1], 1.0)) == pytest.approx(0.5)

    def test_unitary_qubit_bound(self):
        spec = gen.GeneratorSpec(gen.UNITARY, qubit_family(1.0))
        bd = Boundary([1, 0, 0], [0, 0, 1], 1.0)
        assert gen.characteristic_timescale(spec, bd) == pytest.approx(0.5)
        assert gen.timescale_heuristic(spec, bd) == pytest.approx(1.0)

    def test_doubling_energy_halves_bound(self):
        bd = Boundary([1, 0, 0], [0, 0, 1], 1.0)
        t1 = gen.characteristic_timescale(gen.GeneratorSpec(gen.UNITARY, qubit_family(1.0)), bd)
        t2 = gen.characteristic_timescale(gen.GeneratorSpec(gen.UNITARY, qubit_family(2.0)), bd)
        assert t2 == pytest.approx(t1 / 2)

    def test_margin_and_extra_points_only_shrink_bound(self):
        spec = gen.GeneratorSpec(gen.UNITARY, qubit_family(1.0))
        bd = Boundary([1, 0, 0], [0, 0, 1], 1.0)
        base = gen.characteristic_timescale(spec, bd)
        assert gen.characteristic_timescale(spec, bd, [[0, 3, 0]]) == pytest.approx(0.5 / 3)
        assert gen.characteristic_timescale(spec, bd, margin=0.5) < base

    @given(seeds, kinds)
    def test_bound_controls_generator_norm(self, seed, kind):
        # ||L[O]||_1 <= ||O||_1 / tau_c for every O, checked on random samples.
        from fastdrive.operators import trace_norm

        rng = np.random.default_rng(seed)
        spec = specs(seed)[kind]
        bd = Boundary(rng.normal(size=2), rng.normal(size=2), 1.0)
        tau_c = gen.characteristic_timescale(spec, bd)
        o = random_hermitian(3, rng)
        for lam in (bd.lambda_a, bd.lambda_b):
            assert trace_norm(gen.apply(spec, lam, o)) <= trace_norm(o) / tau_c * (1 + 1e-10)


def test_generator_descriptor_round_trip():
    fam = qubit_family()
    spec = gen.generator_from_dict({"generator": "relaxation", "tau_eq": 2.0}, fam)
    assert spec.tau_eq == 2.0
    assert gen.generator_to_dict(spec) == {"generator": "relaxation", "tau_eq": 2.0}
    assert gen.generator_from_dict({"generator": "unitary"}, fam).is_unitary
    with pytest.raises(DomainError):
        gen.generator_from_dict({"generator": "relaxation"}, fam)
    with pytest.raises(DomainError):
        gen.generator_from_dict({}, fam)


def test_gibbs_expectations():
    spec = specs(9)[1]
    lam = [0.2, 0.3]
    rho = gibbs_state(spec.family, lam)
    expected = [np.trace(x @ rho).real for x in spec.family.forces]
    assert np.allclose(gen.gibbs_expectations(spec, lam), expected)
    assert np.allclose(hamiltonian_at(spec.family, lam), spec.family.h0 + spec.family.combine(lam))
