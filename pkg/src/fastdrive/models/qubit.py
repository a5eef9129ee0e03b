"""Closed driven qubit ``H(lam) = J lam . sigma`` under unitary dynamics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exact import work_statistics
from ..fast import JumpProtocol, OperatorModel, power_integrand, constancy_integrand
from ..family import Boundary, HamiltonianFamily, control_point
from ..generators import UNITARY, GeneratorSpec
from ..operators import PAULI, DomainError


def qubit_family(j: float = 1.0, beta: float = 1.0) -> HamiltonianFamily:
    return HamiltonianFamily(np.zeros((2, 2), dtype=complex), tuple(j * s for s in PAULI), beta)


@dataclass(frozen=True)
class QubitModel:
    j: float = 1.0
    beta: float = 1.0
    lambda_a: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    lambda_b: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    alpha: float = 0.05
    tau: float = 1.0

    def __post_init__(self):
        a, b = control_point(self.lambda_a, 3), control_point(self.lambda_b, 3)
        if np.linalg.norm(a) == 0 or np.linalg.norm(b) == 0:
            raise DomainError("qubit endpoints must be nonzero vectors")
        object.__setattr__(self, "lambda_a", a)
        object.__setattr__(self, "lambda_b", b)

    @property
    def phi(self) -> float:
        """Angle between ``lam_A`` and ``lam_B``."""
        a, b = self.lambda_a, self.lambda_b
        c = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    @property
    def jump_point(self) -> np.ndarray:
        return self.alpha * np.cross(self.lambda_a, self.lambda_b)

    @property
    def boundary(self) -> Boundary:
        return Boundary(self.lambda_a, self.lambda_b, self.tau)

    @property
    def spec(self) -> GeneratorSpec:
        return GeneratorSpec(UNITARY, qubit_family(self.j, self.beta))

    def operator_model(self) -> OperatorModel:
        return OperatorModel(self.spec, self.boundary)

    def alpha_limit(self) -> float:
        """``1 / (J tau |sin phi| ||lam_A|| ||lam_B||)``: jumps need ``alpha`` well below this."""
        s = abs(np.sin(self.phi)) * np.linalg.norm(self.lambda_a) * np.linalg.norm(self.lambda_b)
        return np.inf if s == 0 else 1.0 / (self.j * self.tau * s)


def simultaneity_bracket(model: QubitModel) -> float:
    """``1 - tanh^2(beta J ||lam_A||) (1 - (||lam_B|| / ||lam_A||) cos phi)``.

    Positive whenever ``cos phi >= 0``; then power and constancy savings share
    the sign of ``alpha`` and one jump optimizes both.  For obtuse angles with
    ``tanh^2(beta J ||lam_A||) (1 + (||lam_B|| / ||lam_A||) |cos phi|) > 1`` it
    turns negative and the two objectives pull ``alpha`` in opposite directions.
    """
    na, nb = np.linalg.norm(model.lambda_a), np.linalg.norm(model.lambda_b)
    t = np.tanh(model.beta * model.j * na)
    return float(1 - t**2 * (1 - nb / na * np.cos(model.phi)))


def qubit_savings_analytic(model: QubitModel) -> tuple[float, float]:
    """Power and constancy savings of the jump to ``alpha lam_A x lam_B``."""
    na, nb = np.linalg.norm(model.lambda_a), np.linalg.norm(model.lambda_b)
    s2 = np.sin(model.phi) ** 2
    j, a = model.j, model.alpha
    p = 2 * a * j**2 * s2 * na * nb**2 * np.tanh(model.beta * j * na)
    c = 4 * a * j**3 * s2 * na**2 * nb**2 * simultaneity_bracket(model)
    return float(p), float(c)


def qubit_jump_savings(model: QubitModel, steps: int = 1) -> dict:
    """Fast-driving, exact and closed-form savings of the qubit jump protocol."""
    om = model.operator_model()
    xi = model.jump_point
    stats = work_statistics(model.spec, JumpProtocol(model.boundary, xi), steps)
    p_exact = (om.quench_work() - stats.excess) / model.tau
    c_exact = (om.quench_var() - stats.variance) / model.tau
    p_an, c_an = qubit_savings_analytic(model)
    return {
        "alpha": model.alpha,
        "p_fast": power_integrand(om, xi),
        "p_exact": p_exact,
        "c_fast": constancy_integrand(om, xi),
        "c_exact": c_exact,
        "p_analytic": p_an,
        "c_analytic": c_an,
    }


def qubit_alpha_table(alphas, j=1.0, beta=1.0, tau=1.0, lambda_a=(1, 0, 0), lambda_b=(0, 0, 1)) -> list:
    """One row per ``alpha`` of the qubit jump savings, fast versus exact."""
    rows = []
    for a in alphas:
        m = QubitModel(j, beta, np.asarray(lambda_a, float), np.asarray(lambda_b, float), float(a), tau)
        rows.append(qubit_jump_savings(m))
    return rows
