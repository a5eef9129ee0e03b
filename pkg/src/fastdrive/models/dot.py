"""Two-level dot ``H(eps) = eps sigma_z / 2`` relaxing toward its Gibbs state (bit erasure)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from ..fast import OperatorModel, constancy_integrand, linear_protocol, power_integrand, savings
from ..family import Boundary, HamiltonianFamily
from ..generators import RELAXATION, GeneratorSpec
from ..operators import SIGMA_Z, DomainError
from .scalar import ScalarRelaxationModel


def dot_family(beta: float) -> HamiltonianFamily:
    return HamiltonianFamily(np.zeros((2, 2), dtype=complex), (0.5 * SIGMA_Z,), beta)


@dataclass(frozen=True)
class DotModel:
    beta: float
    eps_b: float
    tau_eq: float = 1.0
    tau: float = 0.01

    def __post_init__(self):
        for name in ("beta", "tau_eq", "tau"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and positive, got {v!r}")
        if not (np.isfinite(self.eps_b) and self.beta * self.eps_b > 0):
            raise DomainError(f"beta * eps_b must be positive, got {self.beta * self.eps_b!r}")

    @classmethod
    def from_beta_eps(cls, beta_eps_b: float, eps_b: float = 1.0, tau_eq: float = 1.0, tau: float = 0.01):
        return cls(beta_eps_b / eps_b, eps_b, tau_eq, tau)

    @property
    def boundary(self) -> Boundary:
        return Boundary([0.0], [self.eps_b], self.tau)

    @property
    def spec(self) -> GeneratorSpec:
        return GeneratorSpec(RELAXATION, dot_family(self.beta), self.tau_eq)

    def operator_model(self) -> OperatorModel:
        return OperatorModel(self.spec, self.boundary)

    def quench_entropy(self) -> float:
        """``S = log cosh(beta eps_B / 2)``, written overflow-free."""
        x = 0.5 * self.beta * abs(self.eps_b)
        return float(x + np.log1p(np.exp(-2 * x)) - np.log(2.0))

    def scalar_model(self) -> ScalarRelaxationModel:
        return ScalarRelaxationModel(
            self.boundary, self.tau_eq, self.beta,
            tau_r=lambda e: dot_coefficients(self, e)[0],
            tau_g=lambda e: 0.0,
            tau_b=lambda e: -0.5,
            work=self.quench_entropy() / self.beta,
            var=self.eps_b**2 / 4,
            name="dot",
        )


def dot_coefficients(model: DotModel, eps: float) -> tuple[float, float, float]:
    """``tau_eq`` times R, G and B at gap ``eps``."""
    return float(expit(-model.beta * eps) - 0.5), 0.0, -0.5


def transcendental_residual(model: DotModel, xi: float) -> float:
    """``1/2 - 1/(1+e^{b xi}) - (b eps_B - b xi) e^{b xi} / (1+e^{b xi})^2``, zero at the power optimum."""
    x = model.beta * xi
    f = expit(x)
    return float(0.5 - expit(-x) - (model.beta * model.eps_b - x) * f * (1 - f))


@dataclass(frozen=True)
class DotOptima:
    xi: float
    xi_asymptotic: float
    lam: float


def dot_optimal_points(model: DotModel) -> DotOptima:
    """Exact ``xi`` (root of the transcendental equation), its large-gap limit and ``Lambda``."""
    be = model.beta * model.eps_b
    # The residual is negative just above 0 and positive at eps_B.
    lo, hi = 1e-9 * model.eps_b, model.eps_b
    if transcendental_residual(model, lo) * transcendental_residual(model, hi) > 0:
        raise DomainError("transcendental equation has no sign change on (0, eps_B]")
    xi = brentq(lambda x: transcendental_residual(model, x), lo, hi, xtol=1e-15 * model.eps_b, rtol=1e-15,
                maxiter=500)
    xi_asym = np.log(2 * be) / model.beta if be > 0.5 else float("nan")
    return DotOptima(float(xi), float(xi_asym), model.eps_b / 2)


def erasure_summary(model: DotModel, naive_nodes: int = 20001) -> dict:
    """Optimal and cross savings, the naive linear ramp, and their large-gap predictions."""
    opt = dot_optimal_points(model)
    sm = model.scalar_model()
    naive = savings(sm, linear_protocol(sm.boundary, naive_nodes))
    eb, te, be = model.eps_b, model.tau_eq, model.beta * model.eps_b
    return {
        "beta_eps_b": be,
        "xi": opt.xi,
        "xi_asymptotic": opt.xi_asymptotic,
        "lam": opt.lam,
        "p_xi": power_integrand(sm, opt.xi),
        "c_xi": constancy_integrand(sm, opt.xi),
        "p_lam": power_integrand(sm, opt.lam),
        "c_lam": constancy_integrand(sm, opt.lam),
        "p_naive": naive.p_save,
        "c_naive": naive.c_save,
        "quench_work": sm.quench_work(),
        "quench_var": sm.quench_var(),
        "predicted": {
            "p_xi": eb / (2 * te),
            "c_xi": eb**2 / te * np.log(2 * be) / (2 * be),
            "p_lam": eb / (4 * te),
            "c_lam": eb**2 / (8 * te),
            "p_naive": eb / (4 * te),
            "c_naive": eb**2 / (12 * te),
        },
    }
