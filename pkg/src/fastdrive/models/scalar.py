"""Single-control relaxation model defined by scalar coefficient functions.

The chains are treated per spin in the thermodynamic limit, so no operator
representation exists.  This class exposes the same coefficient interface as
:class:`fastdrive.fast.OperatorModel`, which lets the savings functionals and
the jump optimizer run on the closed-form coefficients unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..family import Boundary, control_point
from ..operators import DomainError


@dataclass(frozen=True)
class ScalarRelaxationModel:
    """``tau_r``, ``tau_g`` and ``tau_b`` return ``tau_eq`` times R, G and B at a scalar control."""

    boundary: Boundary
    tau_eq: float
    beta: float
    tau_r: Callable[[float], float]
    tau_g: Callable[[float], float]
    tau_b: Callable[[float], float]
    work: float
    var: float
    name: str = "scalar"

    def __post_init__(self):
        if self.boundary.d != 1:
            raise DomainError("scalar models have a single control")
        if not (np.isfinite(self.tau_eq) and self.tau_eq > 0):
            raise DomainError(f"tau_eq must be finite and positive, got {self.tau_eq!r}")

    @property
    def d(self) -> int:
        return 1

    def _x(self, lam) -> float:
        return float(control_point(lam, 1)[0])

    def ifrr(self, lam) -> np.ndarray:
        return np.array([self.tau_r(self._x(lam)) / self.tau_eq])

    def g_matrix(self, lam) -> np.ndarray:
        return np.array([[self.tau_g(self._x(lam)) / self.tau_eq]])

    def b_matrix(self, lam) -> np.ndarray:
        return np.array([[self.tau_b(self._x(lam)) / self.tau_eq]])

    def quench_work(self) -> float:
        return self.work

    def quench_var(self) -> float:
        return self.var

    def timescale(self, points=(), margin=0.0) -> float:
        return self.tau_eq / 2

    def delta_h(self, point) -> float:
        """Not defined per spin; reported as NaN."""
        return float("nan")

    def metadata(self) -> dict:
        return {"model": self.name, "tau_eq": self.tau_eq, "beta": self.beta}
