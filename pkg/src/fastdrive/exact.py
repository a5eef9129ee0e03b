"""Exact evolution, work mean and work variance for validating the fast-driving expansion.

Work statistics are taken from the two-time correlator form of the variance::

    var_W = 2 Re int_0^tau dt int_0^t dt' tr( Hdot_t P(t, t')[ (Hdot_t' - <Hdot_t'>) rho_t' ] )

Instantaneous jumps at the ends of a protocol contribute quench terms.  The
inner integral is carried as an auxiliary operator ``K(t)`` obeying
``dK/dt = L K + (Hdot_t - <Hdot_t>) rho_t``, so a sampled protocol needs one
augmented ODE solve instead of a double time quadrature.  A jump protocol
needs a single superoperator exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import generators as gen
from .family import Boundary, control_point, free_energy, gibbs_state, hamiltonian_at
from .fast import JumpProtocol, OperatorModel, SampledProtocol, excess_work_fast, variance_fast
from .operators import DomainError, expectation, matrix_exponential, shifted_observable, variance

TRACE_DRIFT = 1e-7
DEFAULT_STEPS = 16
SLOPE_FLOOR = 1e-12


class IntegrationError(RuntimeError):
    """Numerical integration lost trace preservation."""


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass(frozen=True)
class WorkStatistics:
    mean: float
    excess: float
    variance: float
    final_state: np.ndarray


def _check_trace(rho, where):
    drift = abs(np.trace(rho).real - 1.0)
    if drift > TRACE_DRIFT or not np.all(np.isfinite(rho)):
        raise IntegrationError(f"trace drift {drift:.3g} at {where}")


def _propagator(spec, lam, t) -> np.ndarray:
    return matrix_exponential(t * gen.superoperator(spec, lam))


def _evolve(prop, op) -> np.ndarray:
    n = op.shape[0]
    return (prop @ op.ravel()).reshape(n, n)


def _initial_state(spec, protocol, rho0):
    if rho0 is None:
        return gibbs_state(spec.family, protocol.boundary.lambda_a)
    rho0 = np.asarray(rho0, dtype=complex)
    _check_trace(rho0, "t=0")
    return rho0


def _velocity_operators(spec, protocol: SampledProtocol):
    """Per-segment ``Hdot = lam_dot . X`` (constant because paths are piecewise linear)."""
    fam = spec.family
    dt = np.diff(protocol.times)
    vel = np.diff(protocol.points, axis=0) / dt[:, None]
    return [fam.combine(v) for v in vel]


def _rk4_segment(spec, p0, p1, t0, t1, hdot, state, substeps):
    """RK4 on ``(rho, K, w, v)`` over one linear segment of the control path."""

    def lam_at(t):
        s = (t - t0) / (t1 - t0)
        return p0 * (1 - s) + p1 * s

    def deriv(t, rho, k):
        lam = lam_at(t)
        w_rate = expectation(hdot, rho)
        drho = gen.apply(spec, lam, rho)
        dk = gen.apply(spec, lam, k) + (hdot - w_rate * np.eye(rho.shape[0])) @ rho
        dv = 2 * np.trace(hdot @ k).real
        return drho, dk, w_rate, dv

    rho, k, w, v = state
    h = (t1 - t0) / substeps
    for i in range(substeps):
        t = t0 + i * h
        k1 = deriv(t, rho, k)
        k2 = deriv(t + h / 2, rho + h / 2 * k1[0], k + h / 2 * k1[1])
        k3 = deriv(t + h / 2, rho + h / 2 * k2[0], k + h / 2 * k2[1])
        k4 = deriv(t + h, rho + h * k3[0], k + h * k3[1])
        rho = rho + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        k = k + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        w = w + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        v = v + h / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        _check_trace(rho, f"t={t + h:.6g}")
    return rho, k, w, v


def propagate(spec: gen.GeneratorSpec, protocol, rho0=None, steps: int = DEFAULT_STEPS) -> Trajectory:
    """State trajectory.

    Jump protocols: ``steps + 1`` equispaced snapshots of the exact
    fixed-control evolution.  Sampled protocols: RK4 with ``steps``
    substeps per grid interval, one snapshot per grid node.
    """
    if steps < 1:
        raise DomainError("steps must be at least 1")
    rho = _initial_state(spec, protocol, rho0)
    if isinstance(protocol, JumpProtocol):
        times = np.linspace(0.0, protocol.tau, steps + 1)
        gen_mat = gen.superoperator(spec, protocol.jump_point)
        states = [rho] + [_evolve(matrix_exponential(t * gen_mat), rho) for t in times[1:]]
        for t, s in zip(times, states):
            _check_trace(s, f"t={t:.6g}")
        return Trajectory(times, np.array(states))
    states = [rho]
    zero = np.zeros_like(rho)
    for i, hdot in enumerate(_velocity_operators(spec, protocol)):
        state = _rk4_segment(spec, protocol.points[i], protocol.points[i + 1], protocol.times[i],
                             protocol.times[i + 1], hdot, (states[-1], zero, 0.0, 0.0), steps)
        states.append(state[0])
    return Trajectory(protocol.times, np.array(states))


def work_statistics(spec: gen.GeneratorSpec, protocol, steps: int = DEFAULT_STEPS) -> WorkStatistics:
    """Exact work mean, excess work and variance starting from ``pi(lam_A)``."""
    fam = spec.family
    bd = protocol.boundary
    h_a = hamiltonian_at(fam, bd.lambda_a)
    h_b = hamiltonian_at(fam, bd.lambda_b)
    pi_a = gibbs_state(fam, bd.lambda_a)
    if isinstance(protocol, JumpProtocol):
        first = last = protocol.jump_point
    else:
        first, last = protocol.points[0], protocol.points[-1]
    dh1 = hamiltonian_at(fam, first) - h_a
    dh2 = h_b - hamiltonian_at(fam, last)

    w = expectation(dh1, pi_a)
    v = variance(dh1, pi_a)
    k = shifted_observable(dh1, pi_a) @ pi_a
    rho = pi_a
    if isinstance(protocol, JumpProtocol):
        prop = _propagator(spec, protocol.jump_point, protocol.tau)
        rho, k = _evolve(prop, rho), _evolve(prop, k)
        _check_trace(rho, f"t={protocol.tau:.6g}")
    else:
        if steps < 1:
            raise DomainError("steps must be at least 1")
        for i, hdot in enumerate(_velocity_operators(spec, protocol)):
            rho, k, dw, dv = _rk4_segment(spec, protocol.points[i], protocol.points[i + 1], protocol.times[i],
                                          protocol.times[i + 1], hdot, (rho, k, 0.0, 0.0), steps)
            w += dw
            v += dv
    w += expectation(dh2, rho)
    v += variance(dh2, rho) + 2 * np.trace(dh2 @ k).real
    delta_f = free_energy(fam, bd.lambda_b) - free_energy(fam, bd.lambda_a)
    return WorkStatistics(float(w), float(w - delta_f), float(max(v, 0.0)), rho)


def work_mean_exact(spec, protocol, steps: int = DEFAULT_STEPS, excess: bool = True) -> float:
    stats = work_statistics(spec, protocol, steps)
    return stats.excess if excess else stats.mean


def work_variance_exact(spec, protocol, steps: int = DEFAULT_STEPS) -> float:
    return work_statistics(spec, protocol, steps).variance


def richardson_ratio(spec, protocol: SampledProtocol, steps: int = 4, quantity: str = "excess") -> float:
    """``(q_n - q_2n) / (q_2n - q_4n)``; close to 16 for a fourth-order integrator."""
    q = [getattr(work_statistics(spec, protocol, s), quantity) for s in (steps, 2 * steps, 4 * steps)]
    return (q[0] - q[1]) / (q[1] - q[2])


# -- error scaling ------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingResult:
    taus: np.ndarray
    mean_errors: np.ndarray
    var_errors: np.ndarray
    mean_slope: float | None
    var_slope: float | None

    @property
    def mean_at_floor(self) -> bool:
        return self.mean_slope is None

    @property
    def var_at_floor(self) -> bool:
        return self.var_slope is None


def fit_slope(taus, errors):
    if np.any(errors <= SLOPE_FLOOR):
        return None
    return float(np.polyfit(np.log(taus), np.log(errors), 1)[0])


def error_scaling(spec: gen.GeneratorSpec, boundary: Boundary, jump_point, taus, steps: int = DEFAULT_STEPS
                  ) -> ScalingResult:
    """Log-log slopes of ``|exact - fast|`` for the mean excess work and the variance versus ``tau``.

    A slope is ``None`` ("at numerical floor") when any deviation is below 1e-12.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size < 2 or np.any(taus <= 0):
        raise DomainError("taus must be at least two positive durations")
    jump_point = control_point(jump_point, boundary.d)
    model = OperatorModel(spec, boundary)
    mean_err, var_err = [], []
    for tau in taus:
        protocol = JumpProtocol(boundary.with_tau(tau), jump_point)
        stats = work_statistics(spec, protocol, steps)
        mean_err.append(abs(stats.excess - excess_work_fast(model, protocol)))
        var_err.append(abs(stats.variance - variance_fast(model, protocol)))
    mean_err, var_err = np.array(mean_err), np.array(var_err)
    return ScalingResult(taus, mean_err, var_err, fit_slope(taus, mean_err), fit_slope(taus, var_err))
