"""Fast-driving approximations of excess work and work fluctuations, and their optimal jump protocols."""

from .exact import IntegrationError, error_scaling, propagate, work_mean_exact, work_statistics, work_variance_exact
from .family import (
    Boundary,
    HamiltonianFamily,
    control_point,
    free_energy,
    gibbs_state,
    hamiltonian_at,
    partition,
    relative_entropy,
    relative_entropy_variance,
)
from .fast import (
    FastCoefficients,
    JumpProtocol,
    OperatorModel,
    SampledProtocol,
    SavingsReport,
    b_matrix,
    excess_work_fast,
    g_matrix,
    ifrr,
    linear_protocol,
    savings,
    variance_fast,
)
from .generators import RELAXATION, UNITARY, GeneratorSpec, apply, apply_adjoint, characteristic_timescale
from .operators import DomainError
from .optimize import (
    JumpSolution,
    Objective,
    OptimizationProblem,
    el_residual_constancy,
    el_residual_power,
    max_savings,
    pareto_front,
    solve_jump,
    validity_check,
)

__version__ = "0.1.0"

__all__ = [
    "Boundary",
    "DomainError",
    "FastCoefficients",
    "GeneratorSpec",
    "HamiltonianFamily",
    "IntegrationError",
    "JumpProtocol",
    "JumpSolution",
    "Objective",
    "OperatorModel",
    "OptimizationProblem",
    "RELAXATION",
    "SampledProtocol",
    "SavingsReport",
    "UNITARY",
    "apply",
    "apply_adjoint",
    "b_matrix",
    "characteristic_timescale",
    "control_point",
    "el_residual_constancy",
    "el_residual_power",
    "error_scaling",
    "excess_work_fast",
    "free_energy",
    "g_matrix",
    "gibbs_state",
    "hamiltonian_at",
    "ifrr",
    "linear_protocol",
    "max_savings",
    "pareto_front",
    "partition",
    "propagate",
    "relative_entropy",
    "relative_entropy_variance",
    "savings",
    "solve_jump",
    "validity_check",
    "variance_fast",
    "work_mean_exact",
    "work_statistics",
    "work_variance_exact",
]
