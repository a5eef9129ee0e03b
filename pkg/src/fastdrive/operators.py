"""Dense Hermitian matrix primitives.

All operators are plain complex ``numpy`` arrays.  The helpers here validate
and symmetrize them; nothing in this module carries state.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as la

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
EIG_TOL = 1e-10
SYMMETRIZE_WARN = 1e-8
LOG_FLOOR = 1e-300

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)


class DomainError(ValueError):
    """Input outside the domain of a numerical operation."""


class HermiticityWarning(UserWarning):
    pass


def _square(a, name="matrix"):
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DomainError(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite entries")
    return a


def _same_shape(a, b):
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")


def is_hermitian(a, tol=HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    scale = max(np.max(np.abs(a)), 1.0) if a.size else 1.0
    return bool(np.max(np.abs(a - a.conj().T)) <= tol * scale)


def hermitian(a, name="operator") -> np.ndarray:
    """Return ``(a + a^dagger)/2``, warning if that moved any entry by more than 1e-8."""
    a = _square(a, name)
    sym = 0.5 * (a + a.conj().T)
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(sym - a)) > SYMMETRIZE_WARN * scale:
        warnings.warn(f"{name} was not Hermitian; symmetrized", HermiticityWarning, stacklevel=2)
    return sym


def density_matrix(rho, name="rho") -> np.ndarray:
    """Validate a density matrix (unit trace, positive semidefinite) and return it symmetrized."""
    rho = hermitian(rho, name)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise DomainError(f"{name} has trace {tr!r}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -EIG_TOL:
        raise DomainError(f"{name} is not positive semidefinite")
    return rho


def matrix_exponential(a) -> np.ndarray:
    """Matrix exponential.

    Hermitian and anti-Hermitian arguments go through an eigendecomposition,
    so ``exp(-beta H)`` is exactly Hermitian positive and ``exp(-i t H)`` is
    unitary to machine precision.  Everything else uses Pade
    scaling-and-squaring.
    """
    a = _square(a)
    if is_hermitian(a):
        w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
        return (v * np.exp(w)) @ v.conj().T
    if is_hermitian(1j * a):
        k = 0.5 * (1j * a + (1j * a).conj().T)
        w, v = np.linalg.eigh(k)
        return (v * np.exp(-1j * w)) @ v.conj().T
    return la.expm(a)


def commutator(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    _same_shape(a, b)
    return a @ b - b @ a


def anticommutator(a, b) -> np.ndarray:
    a, b = np.asarray(a), np.asarray(b)
    _same_shape(a, b)
    return a @ b + b @ a


def trace_norm(a) -> float:
    """Sum of singular values."""
    a = _square(a)
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def spectral_norm(a) -> float:
    a = _square(a)
    return float(np.linalg.norm(a, 2))


def expectation(a, rho) -> float:
    """``Re tr(a rho)``; for Hermitian ``a`` and ``rho`` the imaginary part is rounding noise."""
    a, rho = np.asarray(a), np.asarray(rho)
    _same_shape(a, rho)
    return float(np.einsum("ij,ji->", a, rho).real)


def shifted_observable(a, rho) -> np.ndarray:
    """``a - tr(a rho) * 1``."""
    a, rho = np.asarray(a, dtype=complex), np.asarray(rho)
    _same_shape(a, rho)
    return a - np.trace(a @ rho) * np.eye(a.shape[0])


def variance(a, rho) -> float:
    """``tr(a^2 rho) - tr(a rho)^2`` for Hermitian ``a``."""
    return expectation(a @ a, rho) - expectation(a, rho) ** 2


def hermitian_log(rho, name="rho") -> np.ndarray:
    """Matrix logarithm of a positive semidefinite matrix, eigenvalues floored at 1e-300."""
    w, v = np.linalg.eigh(hermitian(rho, name))
    return (v * np.log(np.maximum(w, LOG_FLOOR))) @ v.conj().T


def random_hermitian(dim, rng, scale=1.0) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (a + a.conj().T)


def random_density_matrix(dim, rng, rank=None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
