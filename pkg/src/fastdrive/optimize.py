"""Optimal jump points for power savings, constancy savings and their Pareto mixtures.

A first-order optimal protocol holds the control at a single point for the
whole duration.  The point maximizes the pointwise savings integrand, so the
search reduces to a finite-dimensional maximization.  Gradients and Hessians
come from central finite differences of the integrands; the maximizer is a
multistart damped Newton iteration that falls back to projected gradient
ascent wherever the Hessian is not negative definite (in particular for the
affine unitary objectives, whose maximum sits on the search-region boundary).
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .family import Boundary, control_point
from .fast import (
    JumpProtocol,
    OperatorModel,
    SavingsReport,
    constancy_integrand,
    power_integrand,
    savings,
)
from .generators import GeneratorSpec, timescale_heuristic
from .operators import DomainError

POWER = "power"
CONSTANCY = "constancy"
PARETO = "pareto"
OBJECTIVES = (POWER, CONSTANCY, PARETO)

VALIDITY_RATIO = 0.1
SOLVER_TOL = 1e-7


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Objective:
    kind: str
    weight: float = 1.0
    raw: bool = False

    def __post_init__(self):
        if self.kind not in OBJECTIVES:
            raise DomainError(f"objective must be one of {OBJECTIVES}, got {self.kind!r}")
        if not 0.0 <= self.weight <= 1.0:
            raise DomainError(f"Pareto weight must lie in [0, 1], got {self.weight!r}")

    @classmethod
    def power(cls):
        return cls(POWER)

    @classmethod
    def constancy(cls):
        return cls(CONSTANCY, 0.0)

    @classmethod
    def pareto(cls, weight, raw=False):
        return cls(PARETO, float(weight), raw)

    @property
    def power_weight(self) -> float:
        return {POWER: 1.0, CONSTANCY: 0.0}.get(self.kind, self.weight)

    def label(self) -> str:
        if self.kind == PARETO:
            return f"pareto(w={self.weight:g}{', raw' if self.raw else ''})"
        return self.kind


def pareto_scale(model) -> float:
    """``quench_var / quench_work``, the energy scale that puts C_save in power units.

    Falls back to 1 when the quench work vanishes.
    """
    qw, qv = model.quench_work(), model.quench_var()
    if qw > 0 and qv > 0 and np.isfinite(qv / qw):
        return qv / qw
    return 1.0


@dataclass
class OptimizationProblem:
    """Maximize an objective over jump points.

    ``search_box`` is a ``(d, 2)`` array of per-coordinate bounds.  When it is
    omitted the box is the bounding box of the endpoints padded by a quarter
    of their separation.  ``max_norm`` instead restricts the search to the
    Euclidean ball ``||lam|| <= max_norm`` around the origin; unitary problems
    default to that ball because their objectives are affine.
    """

    model: object
    objective: Objective = field(default_factory=Objective.power)
    search_box: np.ndarray | None = None
    max_norm: float | None = None
    starts: int = 8
    max_iter: int = 200
    fd_rel: float = 1e-5
    fd_abs: float = 1.0
    scan_points: int = 201
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        bd = self.model.boundary
        if self.search_box is not None:
            box = np.asarray(self.search_box, dtype=float).reshape(bd.d, 2)
            if np.any(box[:, 0] > box[:, 1]) or not np.all(np.isfinite(box)):
                raise DomainError("search_box rows must be finite [lo, hi] with lo <= hi")
            self.search_box = box
        elif self.max_norm is None:
            if _is_unitary(self.model):
                self.max_norm = default_unitary_radius(self.model)
            else:
                lo = np.minimum(bd.lambda_a, bd.lambda_b)
                hi = np.maximum(bd.lambda_a, bd.lambda_b)
                pad = 0.25 * np.where(hi > lo, hi - lo, 1.0)
                self.search_box = np.column_stack([lo - pad, hi + pad])
        if self.max_norm is not None and not (np.isfinite(self.max_norm) and self.max_norm > 0):
            raise DomainError(f"max_norm must be finite and positive, got {self.max_norm!r}")
        if self.starts < 1:
            raise DomainError("starts must be at least 1")

    @classmethod
    def from_spec(cls, spec: GeneratorSpec, boundary: Boundary, **kwargs):
        return cls(OperatorModel(spec, boundary), **kwargs)

    # -- region geometry

    def project(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if self.search_box is not None:
            lam = np.clip(lam, self.search_box[:, 0], self.search_box[:, 1])
        if self.max_norm is not None:
            n = np.linalg.norm(lam)
            if n > self.max_norm:
                lam = lam * (self.max_norm / n)
        return lam

    def active(self, lam, g) -> np.ndarray:
        """Boolean mask of coordinates pinned by a box bound with the gradient pushing outward."""
        if self.search_box is None:
            return np.zeros(lam.size, bool)
        width = self.search_box[:, 1] - self.search_box[:, 0]
        tol = 1e-12 * np.maximum(width, 1.0)
        at_lo = (lam - self.search_box[:, 0] <= tol) & (g < 0)
        at_hi = (self.search_box[:, 1] - lam <= tol) & (g > 0)
        return at_lo | at_hi

    def on_sphere(self, lam, g) -> bool:
        if self.max_norm is None:
            return False
        return bool(np.linalg.norm(lam) >= self.max_norm * (1 - 1e-10) and g @ lam > 0)

    def region_scale(self) -> float:
        if self.search_box is not None:
            w = np.linalg.norm(self.search_box[:, 1] - self.search_box[:, 0])
            return float(w) if w > 0 else 1.0
        return 2.0 * self.max_norm


def _is_unitary(model) -> bool:
    spec = getattr(model, "spec", None)
    return isinstance(spec, GeneratorSpec) and spec.is_unitary


def default_unitary_radius(model) -> float:
    """``0.1 / (J tau ||lam_A|| ||lam_B||)`` with ``J`` the largest force norm."""
    bd = model.boundary
    denom = model.force_scale() * bd.tau * np.linalg.norm(bd.lambda_a) * np.linalg.norm(bd.lambda_b)
    return 0.1 / denom if denom > 0 else 0.1


# -- objectives and residuals -----------------------------------------------------


def objective_value(model, objective: Objective, lam, scale=None) -> float:
    w = objective.power_weight
    if w == 1.0:
        return power_integrand(model, lam)
    if w == 0.0:
        return constancy_integrand(model, lam)
    if scale is None:
        scale = 1.0 if objective.raw else pareto_scale(model)
    return w * power_integrand(model, lam) + (1 - w) * constancy_integrand(model, lam) / scale


def fd_steps(lam, fd_rel=1e-5, fd_abs=1.0) -> np.ndarray:
    return fd_rel * (np.abs(lam) + fd_abs)


def fd_gradient(f, lam, fd_rel=1e-5, fd_abs=1.0) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    h = fd_steps(lam, fd_rel, fd_abs)
    g = np.empty(lam.size)
    for j in range(lam.size):
        e = np.zeros(lam.size)
        e[j] = h[j]
        g[j] = (f(lam + e) - f(lam - e)) / (2 * h[j])
    return g


def fd_hessian(f, lam, fd_rel=1e-4, fd_abs=1.0) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    h = fd_steps(lam, fd_rel, fd_abs)
    d = lam.size
    f0 = f(lam)
    hess = np.empty((d, d))
    for j in range(d):
        ej = np.zeros(d)
        ej[j] = h[j]
        hess[j, j] = (f(lam + ej) - 2 * f0 + f(lam - ej)) / h[j] ** 2
        for k in range(j + 1, d):
            ek = np.zeros(d)
            ek[k] = h[k]
            v = (f(lam + ej + ek) - f(lam + ej - ek) - f(lam - ej + ek) + f(lam - ej - ek)) / (4 * h[j] * h[k])
            hess[j, k] = hess[k, j] = v
    return hess


def el_residual_power(model, lam, fd_rel=1e-5, fd_abs=1.0) -> np.ndarray:
    """Gradient of ``(lam - lam_B) . R(lam)``; vanishes at stationary jump points."""
    lam = control_point(lam, model.d)
    return fd_gradient(lambda x: power_integrand(model, x), lam, fd_rel, fd_abs)


def el_residual_constancy(model, lam, fd_rel=1e-5, fd_abs=1.0) -> np.ndarray:
    """Gradient of the full variance-savings integrand; vanishes at stationary jump points."""
    lam = control_point(lam, model.d)
    return fd_gradient(lambda x: constancy_integrand(model, x), lam, fd_rel, fd_abs)


# -- diagnostics and results ----------------------------------------------------------


@dataclass(frozen=True)
class ValidityReport:
    delta_h: float
    tau_c: float
    tau_c_heuristic: float
    tau_over_tau_c: float
    warning: bool

    def to_dict(self) -> dict:
        return asdict(self)


def validity_check(model, point, tau=None) -> ValidityReport:
    """Jump magnitude ``delta_h`` and the ratio ``tau / tau_c`` at ``point``.

    ``tau_c`` is the conservative norm bound; the ``hbar / E_max`` heuristic is
    reported alongside.  The warning flag is raised when ``tau / tau_c > 0.1``.
    """
    point = control_point(point, model.d)
    tau = model.boundary.tau if tau is None else float(tau)
    tau_c = float(model.timescale([point]))
    spec = getattr(model, "spec", None)
    heuristic = float(timescale_heuristic(spec, model.boundary, [point])) if spec is not None else 2 * tau_c
    dh = model.delta_h(point) if hasattr(model, "delta_h") else float("nan")
    ratio = tau / tau_c if tau_c > 0 else float("inf")
    return ValidityReport(float(dh), tau_c, heuristic, ratio, bool(ratio > VALIDITY_RATIO))


@dataclass(frozen=True)
class MaxSavings:
    p_xi: float
    c_lam: float
    p_lam: float
    c_xi: float

    def to_dict(self) -> dict:
        return asdict(self)


def max_savings(model, xi, lam=None) -> MaxSavings:
    """Optimal savings ``P(xi)``, ``C(Lambda)`` and the cross values ``P(Lambda)``, ``C(xi)``."""
    lam = xi if lam is None else lam
    return MaxSavings(
        power_integrand(model, xi),
        constancy_integrand(model, lam),
        power_integrand(model, lam),
        constancy_integrand(model, xi),
    )


@dataclass
class JumpSolution:
    optimum: np.ndarray
    objective_value: float
    el_residual_norm: float
    savings: SavingsReport
    validity: ValidityReport
    objective: str
    converged: bool
    box_limited: bool
    iterations: int
    pareto_scale: float = 1.0

    def to_dict(self) -> dict:
        return {
            "optimum": [float(v) for v in self.optimum],
            "objective": self.objective,
            "objective_value": self.objective_value,
            "el_residual_norm": self.el_residual_norm,
            "converged": self.converged,
            "box_limited": self.box_limited,
            "iterations": self.iterations,
            "pareto_scale": self.pareto_scale,
            "savings": self.savings.to_dict(),
            "validity": self.validity.to_dict(),
        }


# -- solver ------------------------------------------------------------------------------


@dataclass
class _Run:
    lam: np.ndarray
    value: float
    grad_norm: float
    converged: bool
    box_limited: bool
    iterations: int


def _scan_points(problem: OptimizationProblem, rng) -> list:
    bd = problem.model.boundary
    n = problem.scan_points
    if bd.d == 1:
        if problem.search_box is not None:
            lo, hi = problem.search_box[0]
        else:
            lo, hi = -problem.max_norm, problem.max_norm
        grid = [np.linspace(lo, hi, n)]
        span = hi - lo
        offsets = span * np.logspace(-14, 0, n)
        for end in (bd.lambda_a[0], bd.lambda_b[0]):
            grid += [end + offsets, end - offsets]
        pts = np.unique(np.clip(np.concatenate(grid), lo, hi))
        return [np.array([p]) for p in pts]
    pts = []
    for _ in range(n * bd.d):
        if problem.search_box is not None:
            x = rng.uniform(problem.search_box[:, 0], problem.search_box[:, 1])
        else:
            v = rng.normal(size=bd.d)
            x = problem.max_norm * rng.uniform() ** (1 / bd.d) * v / np.linalg.norm(v)
        pts.append(x)
    return pts


def _seeds(problem: OptimizationProblem, f) -> tuple[list, float]:
    """Endpoints, midpoint, box corners and the best points of a coarse scan."""
    bd = problem.model.boundary
    rng = np.random.default_rng(problem.seed)
    fixed = [bd.lambda_a, bd.lambda_b, 0.5 * (bd.lambda_a + bd.lambda_b)]
    if problem.search_box is not None:
        corners = itertools.islice(itertools.product(*problem.search_box), 2 ** min(bd.d, 6))
        fixed += [np.array(c) for c in corners]
    scan = _scan_points(problem, rng)
    values = np.array([f(problem.project(p)) for p in scan])
    scale = float(np.max(np.abs(values))) if values.size else 0.0
    order = np.argsort(-values, kind="stable")
    best = [problem.project(scan[i]) for i in order[: problem.starts]]
    seeds = []
    for p in [problem.project(p) for p in fixed] + best:
        if not any(np.allclose(p, q, rtol=1e-13, atol=0) for q in seeds):
            seeds.append(p)
    return seeds, scale


def _converged(problem, lam, g, fscale) -> tuple[bool, bool]:
    free = ~problem.active(lam, g)
    gt = np.where(free, g, 0.0)
    limited = not free.all()
    if problem.on_sphere(lam, g):
        n = lam / np.linalg.norm(lam)
        gt = gt - (gt @ n) * n
        limited = True
    length = np.linalg.norm(lam) + problem.fd_abs
    return bool(np.linalg.norm(gt) * length <= SOLVER_TOL * fscale), limited


def _ascend(problem: OptimizationProblem, f, start, fscale) -> _Run:
    lam = problem.project(start)
    val = f(lam)
    g = fd_gradient(f, lam, problem.fd_rel, problem.fd_abs)
    for it in range(1, problem.max_iter + 1):
        done, limited = _converged(problem, lam, g, fscale)
        if done:
            return _Run(lam, val, float(np.linalg.norm(g)), True, limited, it - 1)
        free = ~problem.active(lam, g)
        direction = None
        if not problem.on_sphere(lam, g) and free.any():
            hess = fd_hessian(f, lam, 1e-4, problem.fd_abs)[np.ix_(free, free)]
            try:
                if np.all(np.linalg.eigvalsh(hess) < 0):
                    direction = np.zeros_like(lam)
                    direction[free] = -np.linalg.solve(hess, g[free])
            except np.linalg.LinAlgError:
                direction = None
        if direction is None:
            gn = np.linalg.norm(g)
            if gn == 0:
                return _Run(lam, val, 0.0, True, limited, it)
            # On the sphere a long step followed by projection lands next to the
            # constrained maximizer of a locally linear objective.
            reach = 1e6 if problem.on_sphere(lam, g) else 1.0
            direction = g / gn * problem.region_scale() * reach
        t = 1.0
        for _ in range(80):
            trial = problem.project(lam + t * direction)
            tval = f(trial)
            if tval >= val + 1e-4 * g @ (trial - lam) and not np.array_equal(trial, lam):
                break
            t *= 0.5
        else:
            return _Run(lam, val, float(np.linalg.norm(g)), done, limited, it)
        if np.linalg.norm(trial - lam) < 1e-15 * (np.linalg.norm(lam) + problem.fd_abs):
            lam, val = trial, tval
            g = fd_gradient(f, lam, problem.fd_rel, problem.fd_abs)
            done, limited = _converged(problem, lam, g, fscale)
            return _Run(lam, val, float(np.linalg.norm(g)), done, limited, it)
        lam, val = trial, tval
        g = fd_gradient(f, lam, problem.fd_rel, problem.fd_abs)
    done, limited = _converged(problem, lam, g, fscale)
    return _Run(lam, val, float(np.linalg.norm(g)), done, limited, problem.max_iter)


def _best(runs: list, lambda_a) -> _Run:
    """Highest objective among converged runs, then the one closest to ``lam_A``."""
    pool = [r for r in runs if r.converged] or runs
    top = max(r.value for r in pool)
    tol = 1e-10 * max(abs(top), 1e-300)
    near = [r for r in pool if r.value >= top - tol]
    return min(near, key=lambda r: np.linalg.norm(r.lam - lambda_a))


def solve_jump(problem: OptimizationProblem) -> JumpSolution:
    """Multistart maximization of the objective over jump points."""
    model = problem.model
    scale = 1.0 if problem.objective.raw else pareto_scale(model)

    def f(x):
        return objective_value(model, problem.objective, x, scale)

    seeds, fscale = _seeds(problem, f)
    if problem.jobs > 1:
        with ThreadPoolExecutor(max_workers=problem.jobs) as pool:
            runs = list(pool.map(lambda s: _ascend(problem, f, s, fscale), seeds))
    else:
        runs = [_ascend(problem, f, s, fscale) for s in seeds]
    best = _best(runs, model.boundary.lambda_a)
    if not best.converged:
        warnings.warn(f"jump optimizer did not converge for {problem.objective.label()}", ConvergenceWarning,
                      stacklevel=2)
    protocol = JumpProtocol(model.boundary, best.lam)
    return JumpSolution(
        optimum=best.lam,
        objective_value=best.value,
        el_residual_norm=best.grad_norm,
        savings=savings(model, protocol, label=f"jump:{problem.objective.label()}"),
        validity=validity_check(model, best.lam),
        objective=problem.objective.label(),
        converged=best.converged,
        box_limited=best.box_limited,
        iterations=best.iterations,
        pareto_scale=scale,
    )


def pareto_front(model, weights, raw=False, **problem_kwargs) -> list:
    """Solve the Pareto-weighted problem for every weight, in the given order."""
    return [solve_jump(OptimizationProblem(model, Objective.pareto(w, raw), **problem_kwargs)) for w in weights]
