"""Transverse-field Ising chain ``H = -J sum_i (s^z_i s^z_{i+1} + g s^x_i)`` per spin.

Free-fermion modes have energies ``eps_k = 2J sqrt(1 + g^2 - 2 g cos k)``.  The
per-spin log partition function is ``int_0^{2pi} dk log(2 cosh(beta eps_k / 2))``
with no ``1/2pi`` factor; every per-spin quantity below uses the same
convention, so ratios to the quench baselines do not depend on it.  The force
is ``X = -J sum_i s^x_i``, giving::

    <X> / n  = -1/2 int dk  eps'_k tanh(beta eps_k / 2)
    F / n    =      int dk [ eps''_k tanh(beta eps_k / 2) / (2 beta)
                             + eps'_k^2 sech^2(beta eps_k / 2) / 4 ]

``F`` is the Kubo-Mori variance, the curvature ``beta^-2 d^2 log Z / dg^2``.
It is the default force covariance.  ``covariance="symmetric"`` switches to
the plain variance ``<X^2> - <X>^2``, whose mode-pair term is
``eps_k eps''_k (1 + tanh^2(beta eps_k / 2)) / 4`` instead; the two agree at
high temperature and differ once ``beta eps_k`` is of order one.

Momentum integrals use Gauss-Legendre rules on ``[0, 2pi]`` whose node count
doubles until successive results agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..family import Boundary
from ..operators import DomainError
from .scalar import ScalarRelaxationModel

CONVERGED_TOL = 1e-8
FAIL_TOL = 1e-6
MIN_NODES = 64
MAX_NODES = 4096
COVARIANCES = ("kubo-mori", "symmetric")


class QuadratureError(RuntimeError):
    """Node doubling failed to converge."""


@lru_cache(maxsize=16)
def _rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return np.pi * (x + 1), np.pi * w


def dispersion(j, g, k):
    return 2 * j * np.sqrt(1 + g * g - 2 * g * np.cos(k))


def dispersion_dg(j, g, k):
    """``d eps_k / dg = 4 J^2 (g - cos k) / eps_k``."""
    return 4 * j * j * (g - np.cos(k)) / dispersion(j, g, k)


def dispersion_dg2(j, g, k):
    """``d^2 eps_k / dg^2 = 2 J sin^2 k / (1 + g^2 - 2 g cos k)^{3/2}``."""
    return 2 * j * np.sin(k) ** 2 / (1 + g * g - 2 * g * np.cos(k)) ** 1.5


def _log2cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2 * x))


@dataclass(frozen=True)
class TfimModel:
    j: float = 1.0
    beta: float = 1.0
    g_a: float = 0.0
    g_b: float = 3.0
    tau_eq: float = 1.0
    tau: float = 0.01
    quadrature_nodes: int = MIN_NODES
    max_nodes: int = MAX_NODES
    covariance: str = "kubo-mori"

    def __post_init__(self):
        for name in ("j", "beta", "g_a", "g_b", "tau_eq", "tau"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.j <= 0 or self.beta <= 0 or self.tau_eq <= 0 or self.tau <= 0:
            raise DomainError("j, beta, tau_eq and tau must be positive")
        if self.quadrature_nodes < MIN_NODES or self.max_nodes < self.quadrature_nodes:
            raise DomainError(f"need {MIN_NODES} <= quadrature_nodes <= max_nodes")
        if self.covariance not in COVARIANCES:
            raise DomainError(f"covariance must be one of {COVARIANCES}, got {self.covariance!r}")

    @property
    def boundary(self) -> Boundary:
        return Boundary([self.g_a], [self.g_b], self.tau)

    def _integrals(self, g, n):
        k, w = _rule(n)
        e = dispersion(self.j, g, k)
        d1 = dispersion_dg(self.j, g, k)
        d2 = dispersion_dg2(self.j, g, k)
        half = 0.5 * self.beta * e
        th = np.tanh(half)
        sech2 = 1.0 / np.cosh(np.minimum(half, 350.0)) ** 2
        if self.covariance == "symmetric":
            pair = 0.25 * e * d2 * (1 + th**2)
        else:
            pair = d2 * th / (2 * self.beta)
        return np.array([
            w @ _log2cosh(half),
            -0.5 * (w @ (d1 * th)),
            w @ (pair + 0.25 * d1**2 * sech2),
        ])

    def certified(self, g) -> tuple[np.ndarray, int, float]:
        """``(log Z, <X>, F)`` per spin, the node count used and the last relative change."""
        return _certified(self, float(g))

    def _certify(self, g):
        scale = np.array([2 * np.pi, 2 * np.pi * self.j, 2 * np.pi * self.j**2])
        n = self.quadrature_nodes
        prev = self._integrals(g, n)
        while True:
            cur = self._integrals(g, 2 * n)
            change = float(np.max(np.abs(cur - prev) / np.maximum(np.abs(cur), scale)))
            n *= 2
            if change < CONVERGED_TOL or n >= self.max_nodes:
                break
            prev = cur
        if change >= FAIL_TOL:
            raise QuadratureError(f"momentum integrals at g={g!r} changed by {change:.3g} at {n} nodes")
        return cur, n, change

    def log_partition(self, g) -> float:
        return float(self.certified(g)[0][0])

    def mean_force(self, g) -> float:
        return float(self.certified(g)[0][1])

    def force_variance(self, g) -> float:
        return float(self.certified(g)[0][2])

    def quench_work(self) -> float:
        d = self.g_b - self.g_a
        s = self.beta * d * self.mean_force(self.g_a) + self.log_partition(self.g_b) - self.log_partition(self.g_a)
        return s / self.beta

    def quench_var(self) -> float:
        return (self.g_b - self.g_a) ** 2 * self.force_variance(self.g_a)

    def scalar_model(self) -> ScalarRelaxationModel:
        return ScalarRelaxationModel(
            self.boundary, self.tau_eq, self.beta,
            tau_r=lambda g: tfim_coefficients(self, g)[0],
            tau_g=lambda g: tfim_coefficients(self, g)[1],
            tau_b=lambda g: tfim_coefficients(self, g)[2],
            work=self.quench_work(),
            var=self.quench_var(),
            name="ising-quantum",
        )


@lru_cache(maxsize=8192)
def _certified(model: TfimModel, g: float):
    return model._certify(g)


def tfim_coefficients(model: TfimModel, g: float) -> tuple[float, float, float]:
    """``tau_eq`` times R, G and B per spin at transverse field ``g``."""
    _, m, f = model.certified(g)[0]
    _, m_a, f_a = model.certified(model.g_a)[0]
    tr = m - m_a
    return float(tr), float(f - f_a + tr**2), float(-2 * f_a)
