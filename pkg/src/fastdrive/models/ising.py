"""Classical Ising chain ``H = J sum_i (eps s_i - s_i s_{i+1})`` per spin in the thermodynamic limit.

The control is the longitudinal field ``eps`` with force ``X = J sum_i s_i``.
With ``a = beta J eps`` and ``q = exp(-4 beta J)`` the per-spin quantities are::

    log Z / n   = beta J + log(cosh a + sqrt(sinh^2 a + q))
    <X> / n     = -J s(eps),        s = sinh a / sqrt(sinh^2 a + q)
    Var(X) / n  = J^2 q c(eps),     c = cosh a / (sinh^2 a + q)^{3/2}

Everything is evaluated in terms of ``exp(-2|a|)`` so large fields do not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..family import Boundary
from ..operators import DomainError
from .scalar import ScalarRelaxationModel


@dataclass(frozen=True)
class ClassicalIsingModel:
    j: float = 1.0
    beta: float = 1.0
    eps_a: float = 0.0
    eps_b: float = 10.0
    tau_eq: float = 1.0
    tau: float = 0.01

    def __post_init__(self):
        for name in ("j", "beta", "eps_a", "eps_b", "tau_eq", "tau"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.beta <= 0 or self.tau_eq <= 0 or self.tau <= 0:
            raise DomainError("beta, tau_eq and tau must be positive")

    @property
    def boundary(self) -> Boundary:
        return Boundary([self.eps_a], [self.eps_b], self.tau)

    @property
    def _q(self) -> float:
        return float(np.exp(-4 * self.beta * self.j))

    def _parts(self, eps):
        a = self.beta * self.j * eps
        e = np.exp(-2 * abs(a))
        root = np.sqrt((1 - e) ** 2 + 4 * self._q * e)
        return a, e, root

    def log_partition(self, eps) -> float:
        a, e, root = self._parts(eps)
        return float(self.beta * self.j + abs(a) + np.log(0.5 * (1 + e) + 0.5 * root))

    def spin(self, eps) -> float:
        """``s(eps) = sinh a / sqrt(sinh^2 a + q)``, the mean spin."""
        a, e, root = self._parts(eps)
        return float(np.sign(a) * (1 - e) / root)

    def curvature(self, eps) -> float:
        """``c(eps) = cosh a / (sinh^2 a + q)^{3/2}``."""
        a, e, root = self._parts(eps)
        return float(4 * e * (1 + e) / root**3)

    def mean_force(self, eps) -> float:
        return -self.j * self.spin(eps)

    def force_variance(self, eps) -> float:
        return self.j**2 * self._q * self.curvature(eps)

    def quench_work(self) -> float:
        """Per-spin ``S / beta`` from the quench identity."""
        d = self.eps_b - self.eps_a
        s = self.beta * d * self.mean_force(self.eps_a) + self.log_partition(self.eps_b) - self.log_partition(self.eps_a)
        return s / self.beta

    def quench_var(self) -> float:
        return (self.eps_b - self.eps_a) ** 2 * self.force_variance(self.eps_a)

    def scalar_model(self) -> ScalarRelaxationModel:
        return ScalarRelaxationModel(
            self.boundary, self.tau_eq, self.beta,
            tau_r=lambda e: classical_ising_coefficients(self, e)[0],
            tau_g=lambda e: classical_ising_coefficients(self, e)[1],
            tau_b=lambda e: classical_ising_coefficients(self, e)[2],
            work=self.quench_work(),
            var=self.quench_var(),
            name="ising-classical",
        )


def classical_ising_coefficients(model: ClassicalIsingModel, eps: float) -> tuple[float, float, float]:
    """``tau_eq`` times R, G and B per spin at field ``eps``."""
    tr = model.j * (model.spin(model.eps_a) - model.spin(eps))
    f_a = model.force_variance(model.eps_a)
    tg = model.force_variance(eps) - f_a + tr**2
    return tr, tg, -2 * f_a
