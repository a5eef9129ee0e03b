"""Velocity-independent Markovian generators and their adjoints.

Two kinds are supported:

``unitary``
    ``L[rho] = -(i/hbar) [H(lam), rho]``
``relaxation``
    ``L[rho] = (pi(lam) tr(rho) - rho) / tau_eq``, decay into the
    instantaneous Gibbs state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .family import Boundary, HamiltonianFamily, control_point, gibbs_state, hamiltonian_at
from .operators import DomainError, expectation, spectral_norm

UNITARY = "unitary"
RELAXATION = "relaxation"
KINDS = (UNITARY, RELAXATION)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    family: HamiltonianFamily
    tau_eq: float | None = None
    hbar: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"generator kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind == RELAXATION:
            if self.tau_eq is None or not (np.isfinite(self.tau_eq) and self.tau_eq > 0):
                raise DomainError(f"tau_eq must be finite and positive, got {self.tau_eq!r}")
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise DomainError(f"hbar must be finite and positive, got {self.hbar!r}")

    @property
    def is_unitary(self) -> bool:
        return self.kind == UNITARY


def _check_dim(spec, a, name):
    a = np.asarray(a, dtype=complex)
    if a.shape != (spec.family.dim, spec.family.dim):
        raise DomainError(f"{name} has shape {a.shape}, family dim is {spec.family.dim}")
    return a


def apply(spec: GeneratorSpec, lam, rho) -> np.ndarray:
    """``L_lam[rho]``."""
    rho = _check_dim(spec, rho, "rho")
    if spec.is_unitary:
        h = hamiltonian_at(spec.family, lam)
        return -1j / spec.hbar * (h @ rho - rho @ h)
    pi = gibbs_state(spec.family, lam)
    return (pi * np.trace(rho) - rho) / spec.tau_eq


def apply_adjoint(spec: GeneratorSpec, lam, op) -> np.ndarray:
    """Heisenberg-picture generator, defined by ``tr(O L[rho]) = tr(L^dagger[O] rho)``."""
    op = _check_dim(spec, op, "operator")
    if spec.is_unitary:
        h = hamiltonian_at(spec.family, lam)
        return 1j / spec.hbar * (h @ op - op @ h)
    pi = gibbs_state(spec.family, lam)
    return (np.trace(op @ pi) * np.eye(spec.family.dim) - op) / spec.tau_eq


def superoperator(spec: GeneratorSpec, lam) -> np.ndarray:
    """``L_lam`` as a ``dim^2 x dim^2`` matrix acting on row-major ``rho.ravel()``."""
    n = spec.family.dim
    eye = np.eye(n)
    if spec.is_unitary:
        h = hamiltonian_at(spec.family, lam)
        return -1j / spec.hbar * (np.kron(h, eye) - np.kron(eye, h.T))
    pi = gibbs_state(spec.family, lam)
    return (np.outer(pi.ravel(), eye.ravel()) - np.eye(n * n)) / spec.tau_eq


def generator_from_dict(data: dict, family: HamiltonianFamily) -> GeneratorSpec:
    kind = data.get("generator")
    if kind not in KINDS:
        raise DomainError(f"'generator' must be one of {KINDS}, got {kind!r}")
    tau_eq = data.get("tau_eq")
    if kind == RELAXATION and tau_eq is None:
        raise DomainError("relaxation generator requires 'tau_eq'")
    return GeneratorSpec(kind, family, None if tau_eq is None else float(tau_eq), float(data.get("hbar", 1.0)))


def generator_to_dict(spec: GeneratorSpec) -> dict:
    out = {"generator": spec.kind}
    if spec.kind == RELAXATION:
        out["tau_eq"] = spec.tau_eq
    if spec.hbar != 1.0:
        out["hbar"] = spec.hbar
    return out


# -- characteristic timescale -----------------------------------------------


def sample_controls(boundary: Boundary, points=(), margin=0.0) -> list:
    """Endpoints, extra points, and (if ``margin > 0``) corners of their padded bounding box."""
    pts = [boundary.lambda_a, boundary.lambda_b] + [control_point(p, boundary.d) for p in points]
    if margin > 0:
        arr = np.array(pts)
        lo, hi = arr.min(axis=0) - margin, arr.max(axis=0) + margin
        corners = itertools.islice(itertools.product(*zip(lo, hi)), 1024)
        pts.extend(np.array(c) for c in corners)
    return pts


def max_energy(spec: GeneratorSpec, boundary: Boundary, points=(), margin=0.0) -> float:
    return max(spectral_norm(hamiltonian_at(spec.family, p)) for p in sample_controls(boundary, points, margin))


def characteristic_timescale(spec: GeneratorSpec, boundary: Boundary, points=(), margin=0.0) -> float:
    """Lower bound on the generator timescale from induced trace-norm bounds.

    Relaxation: ``||L[O]||_1 <= 2 ||O||_1 / tau_eq`` gives ``tau_eq / 2``.
    Unitary: ``||[H, O]||_1 <= 2 ||H|| ||O||_1`` gives ``hbar / (2 max ||H||)``
    over the sampled controls.
    """
    if not spec.is_unitary:
        return spec.tau_eq / 2
    e = max_energy(spec, boundary, points, margin)
    return np.inf if e == 0 else spec.hbar / (2 * e)


def timescale_heuristic(spec: GeneratorSpec, boundary: Boundary, points=(), margin=0.0) -> float:
    """``hbar / E_max`` for unitary generators, ``tau_eq`` for relaxation."""
    if not spec.is_unitary:
        return spec.tau_eq
    e = max_energy(spec, boundary, points, margin)
    return np.inf if e == 0 else spec.hbar / e


def gibbs_expectations(spec: GeneratorSpec, lam) -> np.ndarray:
    rho = gibbs_state(spec.family, lam)
    return np.array([expectation(x, rho) for x in spec.family.forces])
