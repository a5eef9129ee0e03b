"""Temperature scans of the optimal jump points for the Ising chains."""

from __future__ import annotations

import dataclasses
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..fast import constancy_integrand, linear_protocol, power_integrand, savings
from ..optimize import ConvergenceWarning, Objective, OptimizationProblem, solve_jump

LINEAR_NODES = 65
SCAN_FD_ABS = 1e-12


def default_temperatures(points: int = 40, t_min: float = 0.1, t_max: float = 10.0) -> np.ndarray:
    """``k_B T / J`` log-spaced over ``[t_min, t_max]``."""
    return np.logspace(np.log10(t_min), np.log10(t_max), points)


@dataclass(frozen=True)
class ScanRow:
    temperature: float
    xi: float
    lam: float
    p_xi: float
    c_xi: float
    p_lam: float
    c_lam: float
    p_linear: float
    c_linear: float
    quench_work: float
    quench_var: float
    rel_p_xi: float
    rel_p_lam: float
    rel_p_linear: float
    rel_c_xi: float
    rel_c_lam: float
    rel_c_linear: float
    converged: bool
    error: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]


COLUMN_DOCS = {
    "temperature": "k_B T / J",
    "xi": "power-optimal jump point",
    "lam": "constancy-optimal jump point",
    "p_xi": "power savings at xi (per spin)",
    "c_xi": "constancy savings at xi (per spin)",
    "p_lam": "power savings at lam (per spin)",
    "c_lam": "constancy savings at lam (per spin)",
    "p_linear": "power savings of the linear ramp (per spin)",
    "c_linear": "constancy savings of the linear ramp (per spin)",
    "quench_work": "k_B T S(pi_A||pi_B) per spin",
    "quench_var": "(k_B T)^2 V(pi_A||pi_B) per spin",
    "rel_p_xi": "p_xi * tau_c / quench_work",
    "rel_p_lam": "p_lam * tau_c / quench_work",
    "rel_p_linear": "p_linear * tau_c / quench_work",
    "rel_c_xi": "c_xi * tau_c / quench_var",
    "rel_c_lam": "c_lam * tau_c / quench_var",
    "rel_c_linear": "c_linear * tau_c / quench_var",
    "converged": "1 if both optimizations converged",
    "error": "failure message, empty on success",
}


def _ratio(num, den):
    return num / den if den != 0 else float("nan")


def scan_point(chain, temperature: float, starts: int = 8) -> ScanRow:
    """Optimize both objectives for one temperature.  ``chain`` is a model with ``beta`` and ``j``."""
    nan = float("nan")
    try:
        model = dataclasses.replace(chain, beta=1.0 / (temperature * chain.j)).scalar_model()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            power = solve_jump(OptimizationProblem(model, Objective.power(), starts=starts, fd_abs=SCAN_FD_ABS))
            const = solve_jump(OptimizationProblem(model, Objective.constancy(), starts=starts, fd_abs=SCAN_FD_ABS))
        xi, lam = float(power.optimum[0]), float(const.optimum[0])
        lin = savings(model, linear_protocol(model.boundary, LINEAR_NODES))
        tc = model.timescale()
        qw, qv = model.quench_work(), model.quench_var()
        vals = dict(
            p_xi=power_integrand(model, xi), c_xi=constancy_integrand(model, xi),
            p_lam=power_integrand(model, lam), c_lam=constancy_integrand(model, lam),
            p_linear=lin.p_save, c_linear=lin.c_save,
        )
        return ScanRow(
            temperature, xi, lam, **vals, quench_work=qw, quench_var=qv,
            rel_p_xi=_ratio(vals["p_xi"] * tc, qw), rel_p_lam=_ratio(vals["p_lam"] * tc, qw),
            rel_p_linear=_ratio(vals["p_linear"] * tc, qw), rel_c_xi=_ratio(vals["c_xi"] * tc, qv),
            rel_c_lam=_ratio(vals["c_lam"] * tc, qv), rel_c_linear=_ratio(vals["c_linear"] * tc, qv),
            converged=power.converged and const.converged,
        )
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        return ScanRow(temperature, *([nan] * 16), converged=False, error=f"{type(exc).__name__}: {exc}")


def chain_jump_scan(chain, temperatures=None, jobs: int = 1, starts: int = 8) -> list[ScanRow]:
    """Per-temperature optima and savings, in the order of ``temperatures``.

    A failing temperature yields a row with ``converged = False`` and an
    error message; the rest of the scan continues.
    """
    temps = default_temperatures() if temperatures is None else np.asarray(temperatures, dtype=float)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda t: scan_point(chain, float(t), starts), temps))
    return [scan_point(chain, float(t), starts) for t in temps]


def relative_gap(row: ScanRow, span: float) -> float:
    """``|xi - lam| / span`` with ``span = |lam_B - lam_A|``."""
    return abs(row.xi - row.lam) / span
