"""Linearly parametrized Hamiltonians ``H(lam) = H0 + sum_j lam_j X_j`` and their Gibbs states."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    DomainError,
    expectation,
    hermitian,
    hermitian_log,
    variance,
)


def control_point(values, d=None) -> np.ndarray:
    """Coerce ``values`` to a finite 1-d float array, optionally checking its length."""
    lam = np.atleast_1d(np.asarray(values, dtype=float))
    if lam.ndim != 1 or lam.size < 1:
        raise DomainError(f"control point must be a non-empty vector, got shape {lam.shape}")
    if not np.all(np.isfinite(lam)):
        raise DomainError("control point has non-finite entries")
    if d is not None and lam.size != d:
        raise DomainError(f"control point has length {lam.size}, family expects {d}")
    return lam


@dataclass(frozen=True)
class HamiltonianFamily:
    h0: np.ndarray
    forces: tuple
    beta: float

    def __post_init__(self):
        h0 = hermitian(self.h0, "h0")
        forces = tuple(hermitian(x, f"forces[{j}]") for j, x in enumerate(self.forces))
        if not forces:
            raise DomainError("family needs at least one force operator")
        for j, x in enumerate(forces):
            if x.shape != h0.shape:
                raise DomainError(f"forces[{j}] has shape {x.shape}, h0 has {h0.shape}")
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise DomainError(f"beta must be finite and positive, got {self.beta!r}")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "forces", forces)
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def dim(self) -> int:
        return self.h0.shape[0]

    @property
    def d(self) -> int:
        return len(self.forces)

    @property
    def force_stack(self) -> np.ndarray:
        return np.stack(self.forces)

    def combine(self, weights) -> np.ndarray:
        """``sum_j weights_j X_j`` (no H0)."""
        weights = control_point(weights, self.d)
        return np.tensordot(weights, self.force_stack, axes=1)


@dataclass(frozen=True)
class Boundary:
    lambda_a: np.ndarray
    lambda_b: np.ndarray
    tau: float

    def __post_init__(self):
        a = control_point(self.lambda_a)
        b = control_point(self.lambda_b)
        if a.size != b.size:
            raise DomainError(f"lambda_a has length {a.size} but lambda_b has {b.size}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise DomainError(f"tau must be finite and positive, got {self.tau!r}")
        object.__setattr__(self, "lambda_a", a)
        object.__setattr__(self, "lambda_b", b)
        object.__setattr__(self, "tau", float(self.tau))

    @property
    def d(self) -> int:
        return self.lambda_a.size

    def with_tau(self, tau) -> "Boundary":
        return Boundary(self.lambda_a, self.lambda_b, tau)


def hamiltonian_at(family: HamiltonianFamily, lam) -> np.ndarray:
    return family.h0 + family.combine(lam)


@dataclass(frozen=True)
class _Spectrum:
    energies: np.ndarray
    vectors: np.ndarray
    log_z: float
    populations: np.ndarray = field(repr=False)


def _spectrum(family, lam) -> _Spectrum:
    w, v = np.linalg.eigh(hamiltonian_at(family, lam))
    x = -family.beta * (w - w.min())
    log_norm = np.log(np.sum(np.exp(x)))
    p = np.exp(x - log_norm)
    return _Spectrum(w, v, float(-family.beta * w.min() + log_norm), p)


def gibbs_state(family: HamiltonianFamily, lam) -> np.ndarray:
    s = _spectrum(family, lam)
    return (s.vectors * s.populations) @ s.vectors.conj().T


def log_partition(family: HamiltonianFamily, lam) -> float:
    return _spectrum(family, lam).log_z


def partition(family: HamiltonianFamily, lam) -> float:
    return float(np.exp(log_partition(family, lam)))


def free_energy(family: HamiltonianFamily, lam) -> float:
    return -log_partition(family, lam) / family.beta


def thermal_expectation(family, lam, op) -> float:
    return expectation(op, gibbs_state(family, lam))


def covariance_metric(family: HamiltonianFamily, lam) -> np.ndarray:
    """Symmetric covariance ``F_jk = tr({X_j, X_k} pi)/2 - <X_j><X_k>`` in the Gibbs state."""
    rho = gibbs_state(family, lam)
    xs = family.forces
    means = np.array([expectation(x, rho) for x in xs])
    d = family.d
    out = np.empty((d, d))
    for j in range(d):
        for k in range(j, d):
            out[j, k] = out[k, j] = expectation(xs[j] @ xs[k] + xs[k] @ xs[j], rho) / 2 - means[j] * means[k]
    return out


def relative_entropy(rho1, rho2) -> float:
    """``tr rho1 (log rho1 - log rho2)`` in nats; ``rho2`` must be full rank."""
    rho1 = hermitian(rho1, "rho1")
    rho2 = hermitian(rho2, "rho2")
    if rho1.shape != rho2.shape:
        raise DomainError(f"dimension mismatch: {rho1.shape} vs {rho2.shape}")
    if np.linalg.eigvalsh(rho2).min() <= 0:
        raise DomainError("rho2 is singular; relative entropy is infinite")
    diff = hermitian_log(rho1, "rho1") - hermitian_log(rho2, "rho2")
    return expectation(diff, rho1)


def relative_entropy_variance(rho1, rho2) -> float:
    """``tr rho1 (log rho1 - log rho2)^2 - S(rho1||rho2)^2``."""
    rho1 = hermitian(rho1, "rho1")
    rho2 = hermitian(rho2, "rho2")
    if rho1.shape != rho2.shape:
        raise DomainError(f"dimension mismatch: {rho1.shape} vs {rho2.shape}")
    if np.linalg.eigvalsh(rho2).min() <= 0:
        raise DomainError("rho2 is singular; relative entropy variance is undefined")
    diff = hermitian_log(rho1, "rho1") - hermitian_log(rho2, "rho2")
    return max(variance(diff, rho1), 0.0)


def quench_relative_entropy(family, lambda_a, lambda_b) -> float:
    """``S(pi_A || pi_B)`` via ``beta <H_B - H_A>_A + log Z_B - log Z_A``.

    Exact for Gibbs states and immune to underflow of small populations.
    """
    pa = gibbs_state(family, lambda_a)
    dh = family.combine(control_point(lambda_b) - control_point(lambda_a))
    return family.beta * expectation(dh, pa) + log_partition(family, lambda_b) - log_partition(family, lambda_a)


def quench_relative_entropy_variance(family, lambda_a, lambda_b) -> float:
    """``V(pi_A || pi_B) = beta^2 Var_{pi_A}(H_B - H_A)``."""
    pa = gibbs_state(family, lambda_a)
    dh = family.combine(control_point(lambda_b) - control_point(lambda_a))
    return family.beta**2 * max(variance(dh, pa), 0.0)


# -- JSON model descriptor ---------------------------------------------------


def _decode_matrix(rows, dim, name):
    try:
        m = np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"{name}: entries must be [re, im] pairs") from exc
    if m.shape != (dim, dim):
        raise DomainError(f"{name}: expected {dim}x{dim}, got {m.shape}")
    return m


def _encode_matrix(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def family_from_dict(data: dict) -> HamiltonianFamily:
    """Build a family from ``{"dim", "h0", "forces", "beta"}``; complex entries are ``[re, im]``."""
    missing = {"dim", "h0", "forces", "beta"} - set(data)
    if missing:
        raise DomainError(f"model descriptor missing keys: {sorted(missing)}")
    dim = int(data["dim"])
    h0 = _decode_matrix(data["h0"], dim, "h0")
    forces = tuple(_decode_matrix(f, dim, f"forces[{j}]") for j, f in enumerate(data["forces"]))
    return HamiltonianFamily(h0, forces, float(data["beta"]))


def family_to_dict(family: HamiltonianFamily) -> dict:
    return {
        "dim": family.dim,
        "h0": _encode_matrix(family.h0),
        "forces": [_encode_matrix(x) for x in family.forces],
        "beta": family.beta,
    }
