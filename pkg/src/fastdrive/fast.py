"""First-order fast-driving expansion of the excess work and the work variance.

For a protocol ``lam_t`` on ``[0, tau]`` starting in ``pi(lam_A)``::

    W_ex   ~ kT S(pi_A||pi_B)     + int dt (lam_B - lam_t) . R(lam_t)
    var_W  ~ (kT)^2 V(pi_A||pi_B) + int dt (lam_B - lam_t)^T G(lam_t) (lam_B - lam_t)
                                         + (lam_B - lam_t)^T B(lam_t) (lam_t - lam_A)

with ``R_j = <L^dag[X_j]>_A``, ``G_jk = <L^dag[{dX_j, dX_k}]>_A / 2`` and
``B_jk = <{L^dag[dX_j], dX_k}>_A``, ``dX = X - <X>_A``.  Only the current
control value enters the integrands, never its velocity.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson

from . import generators as gen
from .family import (
    Boundary,
    control_point,
    covariance_metric,
    gibbs_state,
    hamiltonian_at,
    quench_relative_entropy,
    quench_relative_entropy_variance,
)
from .operators import DomainError, anticommutator, commutator, expectation, shifted_observable, trace_norm

UNITS = {
    "hbar": 1.0,
    "k_B": 1.0,
    "w_ex": "energy",
    "variance": "energy^2",
    "p_save": "energy/time",
    "c_save": "energy^2/time",
}


# -- protocols -----------------------------------------------------------------


@dataclass(frozen=True)
class JumpProtocol:
    """``lam_A -> jump_point`` at ``t = 0``, hold for ``tau``, ``-> lam_B`` at ``t = tau``."""

    boundary: Boundary
    jump_point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "jump_point", control_point(self.jump_point, self.boundary.d))

    @property
    def tau(self) -> float:
        return self.boundary.tau

    def path(self, t):
        return self.jump_point.copy()

    def velocity(self, t):
        return np.zeros(self.boundary.d)


@dataclass(frozen=True)
class SampledProtocol:
    """Control path sampled on a strictly increasing grid from 0 to tau.

    Between nodes the path is linear.  ``points[0]`` and ``points[-1]`` may
    differ from the boundary values; the remaining gap is an instantaneous
    jump at the corresponding end.
    """

    boundary: Boundary
    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.points, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if t.ndim != 1 or p.shape != (t.size, self.boundary.d):
            raise DomainError(f"grid shapes {t.shape} and {p.shape} do not match d={self.boundary.d}")
        if t.size < 2 or np.any(np.diff(t) <= 0):
            raise DomainError("sample times must be strictly increasing with at least two nodes")
        if not np.isclose(t[0], 0.0, atol=1e-14 * self.boundary.tau) or not np.isclose(t[-1], self.boundary.tau):
            raise DomainError("sample grid must start at 0 and end at tau")
        if not np.all(np.isfinite(p)):
            raise DomainError("sampled control values must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    @property
    def tau(self) -> float:
        return self.boundary.tau

    def _segment(self, t):
        return int(np.clip(np.searchsorted(self.times, t, side="right") - 1, 0, self.times.size - 2))

    def path(self, t):
        return np.array([np.interp(t, self.times, self.points[:, j]) for j in range(self.boundary.d)])

    def velocity(self, t):
        i = self._segment(t)
        return (self.points[i + 1] - self.points[i]) / (self.times[i + 1] - self.times[i])


def linear_protocol(boundary: Boundary, nodes: int = 65) -> SampledProtocol:
    """``lam_t = lam_A (1 - t/tau) + lam_B t/tau`` on ``nodes`` equispaced times."""
    s = np.linspace(0.0, 1.0, nodes)
    pts = boundary.lambda_a[None, :] * (1 - s[:, None]) + boundary.lambda_b[None, :] * s[:, None]
    return SampledProtocol(boundary, s * boundary.tau, pts)


def constant_protocol(boundary: Boundary, point, nodes: int = 3) -> SampledProtocol:
    s = np.linspace(0.0, 1.0, nodes)
    return SampledProtocol(boundary, s * boundary.tau, np.tile(control_point(point, boundary.d), (nodes, 1)))


# -- coefficients --------------------------------------------------------------


@dataclass(frozen=True)
class FastCoefficients:
    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    @property
    def b_sym(self) -> np.ndarray:
        return 0.5 * (self.b + self.b.T)


def _shifted_forces(spec, pi_a):
    return [shifted_observable(x, pi_a) for x in spec.family.forces]


def ifrr(spec: gen.GeneratorSpec, lam, lambda_a) -> np.ndarray:
    """Initial force relaxation rate ``R_j = tr(L^dag[X_j] pi_A)``."""
    pi_a = gibbs_state(spec.family, lambda_a)
    return np.array([expectation(gen.apply_adjoint(spec, lam, x), pi_a) for x in spec.family.forces])


def g_matrix(spec: gen.GeneratorSpec, lam, lambda_a) -> np.ndarray:
    pi_a = gibbs_state(spec.family, lambda_a)
    dx = _shifted_forces(spec, pi_a)
    d = len(dx)
    g = np.empty((d, d))
    for j in range(d):
        for k in range(j, d):
            g[j, k] = g[k, j] = 0.5 * expectation(gen.apply_adjoint(spec, lam, anticommutator(dx[j], dx[k])), pi_a)
    return g


def b_matrix(spec: gen.GeneratorSpec, lam, lambda_a, symmetrize=False) -> np.ndarray:
    pi_a = gibbs_state(spec.family, lambda_a)
    dx = _shifted_forces(spec, pi_a)
    evolved = [gen.apply_adjoint(spec, lam, x) for x in dx]
    b = np.array([[expectation(anticommutator(lj, xk), pi_a) for xk in dx] for lj in evolved])
    return 0.5 * (b + b.T) if symmetrize else b


def relaxation_closed_form(spec: gen.GeneratorSpec, lam, lambda_a) -> FastCoefficients:
    """R, G, B of the relaxation generator from Gibbs means and the covariance metric.

    ``R = (<X>_lam - <X>_A)/tau_eq``,
    ``G = (F(lam) - F(lam_A))/tau_eq + tau_eq R R^T``,
    ``B = -2 F(lam_A)/tau_eq``.
    """
    if spec.is_unitary:
        raise DomainError("relaxation closed form needs a relaxation generator")
    tau = spec.tau_eq
    r = (gen.gibbs_expectations(spec, lam) - gen.gibbs_expectations(spec, lambda_a)) / tau
    f_a = covariance_metric(spec.family, lambda_a)
    g = (covariance_metric(spec.family, lam) - f_a) / tau + tau * np.outer(r, r)
    return FastCoefficients(r, g, -2 * f_a / tau)


def unitary_closed_form(spec: gen.GeneratorSpec, lam, lambda_a) -> FastCoefficients:
    """R, G, B of the unitary generator written with explicit commutators."""
    if not spec.is_unitary:
        raise DomainError("unitary closed form needs a unitary generator")
    pi_a = gibbs_state(spec.family, lambda_a)
    h = hamiltonian_at(spec.family, lam)
    c = -1j / spec.hbar
    r = np.array([(c * np.trace(commutator(x, h) @ pi_a)).real for x in spec.family.forces])
    dx = _shifted_forces(spec, pi_a)
    g = np.array([[(0.5 * c * np.trace(commutator(anticommutator(a, b), h) @ pi_a)).real for b in dx] for a in dx])
    b = np.array([[(c * np.trace(anticommutator(commutator(a, h), bb) @ pi_a)).real for bb in dx] for a in dx])
    return FastCoefficients(r, g, b)


def unitary_savings_integrands(spec: gen.GeneratorSpec, boundary: Boundary, lam):
    """Power and constancy savings integrands of a closed system, written in ``H`` alone.

    ``p = (i/hbar) <[H_B, H]>_A`` and
    ``c = (i/hbar) (<[H_B^2, H]>_A - <{H_A, [H_B, H]}>_A - 2 <H_B - H_A>_A <[H_B, H]>_A)``.
    """
    fam = spec.family
    ha, hb, h = (hamiltonian_at(fam, p) for p in (boundary.lambda_a, boundary.lambda_b, lam))
    pi_a = gibbs_state(fam, boundary.lambda_a)
    c = 1j / spec.hbar
    ev = lambda op: np.trace(op @ pi_a)  # noqa: E731
    comm_bh = commutator(hb, h)
    p = (c * ev(comm_bh)).real
    cc = (c * (ev(commutator(hb @ hb, h)) - ev(anticommutator(ha, comm_bh)) - 2 * ev(hb - ha) * ev(comm_bh))).real
    return float(p), float(cc)


# -- driving models --------------------------------------------------------------


class OperatorModel:
    """Fast-driving coefficients of a finite-dimensional family under a generator.

    The coefficient interface (``ifrr``, ``g_matrix``, ``b_matrix``,
    ``quench_work``, ``quench_var``) is shared with the scalar chain models,
    so the optimizer and the savings functionals accept either.
    """

    def __init__(self, spec: gen.GeneratorSpec, boundary: Boundary):
        if boundary.d != spec.family.d:
            raise DomainError(f"boundary has d={boundary.d}, family has d={spec.family.d}")
        self.spec = spec
        self.boundary = boundary

    @property
    def d(self) -> int:
        return self.boundary.d

    @property
    def beta(self) -> float:
        return self.spec.family.beta

    @cached_property
    def _pi_a(self):
        return gibbs_state(self.spec.family, self.boundary.lambda_a)

    @cached_property
    def _dx(self):
        return _shifted_forces(self.spec, self._pi_a)

    def ifrr(self, lam) -> np.ndarray:
        lam = control_point(lam, self.d)
        return np.array([expectation(gen.apply_adjoint(self.spec, lam, x), self._pi_a) for x in self.spec.family.forces])

    def g_matrix(self, lam) -> np.ndarray:
        lam = control_point(lam, self.d)
        dx, pi_a = self._dx, self._pi_a
        g = np.empty((self.d, self.d))
        for j in range(self.d):
            for k in range(j, self.d):
                op = gen.apply_adjoint(self.spec, lam, anticommutator(dx[j], dx[k]))
                g[j, k] = g[k, j] = 0.5 * expectation(op, pi_a)
        return g

    def b_matrix(self, lam) -> np.ndarray:
        lam = control_point(lam, self.d)
        evolved = [gen.apply_adjoint(self.spec, lam, x) for x in self._dx]
        return np.array([[expectation(anticommutator(lj, xk), self._pi_a) for xk in self._dx] for lj in evolved])

    def coefficients(self, lam) -> FastCoefficients:
        return FastCoefficients(self.ifrr(lam), self.g_matrix(lam), self.b_matrix(lam))

    @cached_property
    def relative_entropy(self) -> float:
        return quench_relative_entropy(self.spec.family, self.boundary.lambda_a, self.boundary.lambda_b)

    @cached_property
    def relative_entropy_variance(self) -> float:
        return quench_relative_entropy_variance(self.spec.family, self.boundary.lambda_a, self.boundary.lambda_b)

    def quench_work(self) -> float:
        return self.relative_entropy / self.beta

    def quench_var(self) -> float:
        return self.relative_entropy_variance / self.beta**2

    def timescale(self, points=(), margin=0.0) -> float:
        return gen.characteristic_timescale(self.spec, self.boundary, points, margin)

    def delta_h(self, point) -> float:
        """``2 max(||H(p) - H_A||_1, ||H_B - H(p)||_1)``."""
        fam = self.spec.family
        point = control_point(point, self.d)
        h = hamiltonian_at(fam, point)
        return 2 * max(
            trace_norm(h - hamiltonian_at(fam, self.boundary.lambda_a)),
            trace_norm(hamiltonian_at(fam, self.boundary.lambda_b) - h),
        )

    def force_scale(self) -> float:
        """Largest spectral norm among the force operators (the family's energy scale)."""
        return max(float(np.linalg.norm(x, 2)) for x in self.spec.family.forces)

    def metadata(self) -> dict:
        return {"model": "operator", "generator": gen.generator_to_dict(self.spec), "dim": self.spec.family.dim,
                "beta": self.beta}


# -- integrands and functionals ------------------------------------------------------


def power_integrand(model, lam) -> float:
    """``(lam - lam_B) . R(lam)``: the power savings gained per unit time spent at ``lam``."""
    lam = control_point(lam, model.d)
    return float((lam - model.boundary.lambda_b) @ model.ifrr(lam))


def constancy_integrand(model, lam) -> float:
    """``(lam - lam_B)^T (G (lam_B - lam) + B (lam - lam_A))`` with the raw, unsymmetrized ``B``."""
    lam = control_point(lam, model.d)
    bd = model.boundary
    down = lam - bd.lambda_b
    return float(down @ (model.g_matrix(lam) @ (-down) + model.b_matrix(lam) @ (lam - bd.lambda_a)))


def _check_protocol(model, protocol):
    a, b = model.boundary, protocol.boundary
    if not (np.allclose(a.lambda_a, b.lambda_a) and np.allclose(a.lambda_b, b.lambda_b)):
        raise DomainError("protocol boundary does not match the model's endpoints")


def _time_average(model, protocol, integrand):
    """``tau^{-1} int dt integrand(lam_t)``: exact for jumps, composite Simpson for sampled grids."""
    _check_protocol(model, protocol)
    if isinstance(protocol, JumpProtocol):
        return integrand(model, protocol.jump_point)
    if protocol.times.size < 3:
        raise DomainError("Simpson quadrature needs at least three grid nodes")
    values = np.array([integrand(model, p) for p in protocol.points])
    return float(simpson(values, x=protocol.times)) / protocol.tau


def excess_work_fast(model, protocol) -> float:
    return model.quench_work() - protocol.tau * _time_average(model, protocol, power_integrand)


def variance_fast(model, protocol) -> float:
    return model.quench_var() - protocol.tau * _time_average(model, protocol, constancy_integrand)


@dataclass(frozen=True)
class SavingsReport:
    p_save: float
    c_save: float
    quench_work: float
    quench_var: float
    w_ex_approx: float
    var_approx: float
    tau: float
    protocol: str = ""

    def to_dict(self) -> dict:
        out = asdict(self)
        out["units"] = dict(UNITS)
        return out


def savings(model, protocol, label=None) -> SavingsReport:
    p = _time_average(model, protocol, power_integrand)
    c = _time_average(model, protocol, constancy_integrand)
    tau = protocol.tau
    qw, qv = model.quench_work(), model.quench_var()
    if label is None:
        label = "jump" if isinstance(protocol, JumpProtocol) else "sampled"
    return SavingsReport(p, c, qw, qv, qw - tau * p, qv - tau * c, tau, label)
