"""Closed-form and small-matrix models: driven qubit, erasure dot, classical and quantum Ising chains."""

from .dot import DotModel, DotOptima, dot_coefficients, dot_family, dot_optimal_points, erasure_summary
from .ising import ClassicalIsingModel, classical_ising_coefficients
from .qubit import QubitModel, qubit_alpha_table, qubit_family, qubit_savings_analytic, simultaneity_bracket
from .scalar import ScalarRelaxationModel
from .scan import ScanRow, chain_jump_scan, default_temperatures
from .tfim import QuadratureError, TfimModel, tfim_coefficients

__all__ = [
    "ClassicalIsingModel",
    "DotModel",
    "DotOptima",
    "QuadratureError",
    "QubitModel",
    "ScalarRelaxationModel",
    "ScanRow",
    "TfimModel",
    "chain_jump_scan",
    "classical_ising_coefficients",
    "default_temperatures",
    "dot_coefficients",
    "dot_family",
    "dot_optimal_points",
    "erasure_summary",
    "qubit_alpha_table",
    "qubit_family",
    "qubit_savings_analytic",
    "simultaneity_bracket",
    "tfim_coefficients",
]
