"""Command-line front end.

Every subcommand builds an :class:`~fastdrive.config.ExperimentConfig`, runs it
and writes CSV or JSON with a ``#`` metadata header.  Exit status is 0 on
success, 1 when a solver failed (partial results are still written and
flagged) and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from dataclasses import asdict

import numpy as np

from . import __version__
from .config import SCHEMAS, ConfigError, ExperimentConfig, build_config, validate_config
from .exact import fit_slope, work_statistics
from .family import Boundary, control_point, family_from_dict
from .fast import JumpProtocol, OperatorModel, excess_work_fast, linear_protocol, variance_fast
from .generators import characteristic_timescale, generator_from_dict, timescale_heuristic
from .io import build_metadata, emit, render_csv, render_json
from .models import ClassicalIsingModel, DotModel, QubitModel, TfimModel, chain_jump_scan, erasure_summary
from .models.qubit import qubit_alpha_table
from .models.scan import COLUMN_DOCS, ScanRow, default_temperatures
from .operators import DomainError
from .optimize import ConvergenceWarning, Objective, OptimizationProblem, pareto_front, solve_jump

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class Result:
    """What a runner produces: tabular rows for CSV, a payload for JSON, extra metadata."""

    def __init__(self, columns, rows, payload, meta=None, failed=False):
        self.columns = columns
        self.rows = rows
        self.payload = payload
        self.meta = meta or {}
        self.failed = failed


def parse_sweep(text: str) -> np.ndarray:
    """``lo:hi:n`` to ``n`` log-spaced values."""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise DomainError(f"tau sweep must look like lo:hi:n, got {text!r}") from exc
    if not (0 < lo < hi) or n < 2:
        raise DomainError(f"tau sweep needs 0 < lo < hi and n >= 2, got {text!r}")
    return np.logspace(np.log10(lo), np.log10(hi), n)


def _load_descriptor(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read model descriptor {path!r}: {exc}") from exc
    family = family_from_dict(data)
    spec = generator_from_dict(data, family)
    return data, spec


def _validity_meta(model, points) -> dict:
    bd = model.boundary
    spec = model.spec
    tau_c = characteristic_timescale(spec, bd, points)
    return {
        "tau_c": tau_c,
        "tau_c_kind": "norm bound (hbar / 2 E_max or tau_eq / 2)",
        "tau_c_heuristic": timescale_heuristic(spec, bd, points),
        "tau_over_tau_c": bd.tau / tau_c,
    }


# -- runners ------------------------------------------------------------------------


def run_qubit(p, cfg) -> Result:
    alphas = np.linspace(p["alpha_max"] / p["points"], p["alpha_max"], p["points"])
    rows = qubit_alpha_table(alphas, 1.0, p["beta_j"], p["tau_j"], p["lambda_a"], p["lambda_b"])
    qm = QubitModel(1.0, p["beta_j"], np.array(p["lambda_a"]), np.array(p["lambda_b"]), alphas[-1], p["tau_j"])
    pts = [a * np.cross(qm.lambda_a, qm.lambda_b) for a in alphas]
    meta = _validity_meta(qm.operator_model(), pts)
    meta["alpha_limit"] = qm.alpha_limit()
    warn = [float(a) for a in alphas if a > 0.1 * qm.alpha_limit()]
    meta["validity_warnings"] = f"{len(warn)} of {len(alphas)} alphas exceed 0.1 of the alpha limit"
    cols = [
        ("alpha", "jump magnitude, jump point = alpha lam_A x lam_B"),
        ("p_fast", "power savings, fast-driving (J^2)"),
        ("p_exact", "power savings, exact evolution (J^2)"),
        ("c_fast", "constancy savings, fast-driving (J^3)"),
        ("c_exact", "constancy savings, exact evolution (J^3)"),
        ("p_analytic", "power savings, closed form (J^2)"),
        ("c_analytic", "constancy savings, closed form (J^3)"),
    ]
    return Result(cols, rows, rows, meta)


def run_erasure(p, cfg) -> Result:
    model = DotModel.from_beta_eps(p["beta_eps_b"], p["eps_b"], p["tau_eq"], p["tau"])
    summary = erasure_summary(model, p["naive_nodes"])
    om = model.operator_model()
    objectives = {"power": [Objective.power()], "constancy": [Objective.constancy()],
                  "both": [Objective.power(), Objective.constancy()]}[p["objective"]]
    failed = False
    solutions = {}
    for obj in objectives:
        sol = solve_jump(OptimizationProblem(om, obj, seed=cfg.seed, jobs=cfg.jobs))
        failed |= not sol.converged
        solutions[obj.kind] = sol.to_dict()
    summary["optimizer"] = solutions
    meta = _validity_meta(om, [[summary["xi"]], [summary["lam"]]])
    flat = {k: v for k, v in summary.items() if isinstance(v, float)}
    cols = [(k, k.replace("_", " ")) for k in flat]
    return Result(cols, [flat], summary, meta, failed)


def _chain_result(chain, p, cfg, span) -> Result:
    temps = default_temperatures(p["points"], p["t_min"], p["t_max"])
    rows = chain_jump_scan(chain, temps, jobs=cfg.jobs, starts=p["starts"])
    failed = any(not r.converged for r in rows)
    meta = {"tau_c": chain.tau_eq / 2, "tau_c_kind": "tau_eq / 2", "span": span,
            "failed_temperatures": [r.temperature for r in rows if not r.converged]}
    cols = [(c, COLUMN_DOCS[c]) for c in ScanRow.columns()]
    dicts = [asdict(r) for r in rows]
    return Result(cols, dicts, dicts, meta, failed)


def run_ising_classical(p, cfg) -> Result:
    chain = ClassicalIsingModel(p["j"], 1.0, p["eps_a"], p["eps_b"], p["tau_eq"])
    return _chain_result(chain, p, cfg, abs(p["eps_b"] - p["eps_a"]))


def run_ising_quantum(p, cfg) -> Result:
    chain = TfimModel(p["j"], 1.0, p["g_a"], p["g_b"], p["tau_eq"], max_nodes=p["max_nodes"],
                      covariance=p["covariance"])
    return _chain_result(chain, p, cfg, abs(p["g_b"] - p["g_a"]))


def _optimize_model(p):
    data, spec = _load_descriptor(p["model"])
    la = p["lambda_a"] if p["lambda_a"] is not None else data.get("lambda_a")
    lb = p["lambda_b"] if p["lambda_b"] is not None else data.get("lambda_b")
    if la is None or lb is None:
        raise DomainError("lambda_a and lambda_b are required (flags or descriptor keys)")
    return OperatorModel(spec, Boundary(la, lb, p["tau"]))


def run_optimize(p, cfg) -> Result:
    if not p["model"]:
        raise DomainError("optimize needs --model PATH to a JSON model descriptor")
    model = _optimize_model(p)
    obj = {"power": Objective.power(), "constancy": Objective.constancy()}.get(
        p["objective"]) or Objective.pareto(p["weight"], p["raw"])
    box = None if p["box"] is None else np.array(p["box"]).reshape(model.d, 2)
    sol = solve_jump(OptimizationProblem(model, obj, search_box=box, max_norm=p["max_norm"], starts=p["starts"],
                                         seed=cfg.seed, jobs=cfg.jobs))
    out = sol.to_dict()
    meta = _validity_meta(model, [sol.optimum])
    meta["pareto_scaling"] = "C_save divided by quench_var / quench_work" if not p["raw"] else "raw weights"
    row = {"objective": out["objective"], "objective_value": out["objective_value"],
           "p_save": out["savings"]["p_save"], "c_save": out["savings"]["c_save"],
           "el_residual_norm": out["el_residual_norm"], "converged": sol.converged,
           "box_limited": sol.box_limited, **{f"optimum_{j}": v for j, v in enumerate(out["optimum"])}}
    cols = [(k, k.replace("_", " ")) for k in row]
    return Result(cols, [row], out, meta, not sol.converged)


def _exact_setup(p):
    if p["model"] == "dot":
        dm = DotModel(p["beta_eps_b"], 1.0, p["tau_eq"])
        return dm.spec, Boundary([0.0], [1.0], 1.0), np.array([0.5])
    if p["model"] == "qubit":
        la = np.array(p["lambda_a"] or [1.0, 0.0, 0.0])
        lb = np.array(p["lambda_b"] or [0.0, 0.0, 1.0])
        qm = QubitModel(1.0, p["beta_j"], la, lb, p["alpha"], 1.0)
        return qm.spec, qm.boundary, qm.jump_point
    data, spec = _load_descriptor(p["model"])
    la = p["lambda_a"] if p["lambda_a"] is not None else data.get("lambda_a")
    lb = p["lambda_b"] if p["lambda_b"] is not None else data.get("lambda_b")
    jp = p["jump_point"] if p["jump_point"] is not None else data.get("jump_point")
    if la is None or lb is None or jp is None:
        raise DomainError("lambda_a, lambda_b and jump_point are required for a descriptor model")
    return spec, Boundary(la, lb, 1.0), control_point(jp, len(la))


def run_exact(p, cfg) -> Result:
    spec, base, jump = _exact_setup(p)
    taus = parse_sweep(p["tau_sweep"])
    rows = []
    for tau in taus:
        bd = base.with_tau(tau)
        model = OperatorModel(spec, bd)
        proto = JumpProtocol(bd, jump) if p["protocol"] == "jump" else linear_protocol(bd, 17)
        stats = work_statistics(spec, proto, p["steps"])
        rows.append({"tau": tau, "w_ex_exact": stats.excess, "w_ex_fast": excess_work_fast(model, proto),
                     "var_exact": stats.variance, "var_fast": variance_fast(model, proto)})
    dm = np.array([abs(r["w_ex_exact"] - r["w_ex_fast"]) for r in rows])
    dv = np.array([abs(r["var_exact"] - r["var_fast"]) for r in rows])
    meta = _validity_meta(OperatorModel(spec, base.with_tau(taus[-1])), [jump])
    meta["mean_error_slope"] = fit_slope(taus, dm) if fit_slope(taus, dm) is not None else "at numerical floor"
    meta["var_error_slope"] = fit_slope(taus, dv) if fit_slope(taus, dv) is not None else "at numerical floor"
    cols = [("tau", "protocol duration"), ("w_ex_exact", "exact excess work"),
            ("w_ex_fast", "fast-driving excess work"), ("var_exact", "exact work variance"),
            ("var_fast", "fast-driving work variance")]
    return Result(cols, rows, {"rows": rows, "slopes": {k: meta[k] for k in ("mean_error_slope", "var_error_slope")}},
                  meta)


def run_sweep(p, cfg) -> Result:
    dm = DotModel.from_beta_eps(p["beta_eps_b"], 1.0, p["tau_eq"])
    model = dm.operator_model()
    sols = pareto_front(model, p["weights"], raw=p["raw"], starts=p["starts"], seed=cfg.seed, jobs=cfg.jobs)
    rows = [{"weight": w, "point": float(s.optimum[0]), "p_save": s.savings.p_save, "c_save": s.savings.c_save,
             "objective_value": s.objective_value, "converged": s.converged} for w, s in zip(p["weights"], sols)]
    meta = {"pareto_scale": sols[0].pareto_scale, "pareto_scaling": "raw" if p["raw"] else "quench_var / quench_work",
            **_validity_meta(model, [s.optimum for s in sols])}
    cols = [("weight", "Pareto weight on power savings"), ("point", "optimal jump gap"),
            ("p_save", "power savings"), ("c_save", "constancy savings"),
            ("objective_value", "weighted objective"), ("converged", "1 if the solver converged")]
    return Result(cols, rows, rows, meta, any(not s.converged for s in sols))


RUNNERS = {
    "qubit": run_qubit,
    "erasure": run_erasure,
    "ising-classical": run_ising_classical,
    "ising-quantum": run_ising_quantum,
    "optimize": run_optimize,
    "exact": run_exact,
    "sweep": run_sweep,
}


def run(config: ExperimentConfig) -> int:
    """Execute a validated config, write its output and return the exit status."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            result = RUNNERS[config.command](config.params, config)
    except DomainError as exc:
        print(f"fastdrive: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    meta = build_metadata(config, result.meta, config.timestamps)
    meta["status"] = "failed (partial results)" if result.failed else "ok"
    text = render_json(result.payload, meta) if config.format == "json" else render_csv(result.columns,
                                                                                        result.rows, meta)
    try:
        emit(text, config.output)
    except OSError as exc:
        print(f"fastdrive: error: cannot write {config.output!r}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_FAILURE if result.failed else EXIT_OK


# -- argument parsing -------------------------------------------------------------


def _floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _default_jobs():
    try:
        return max(int(os.environ.get("FASTDRIVE_JOBS", "1")), 1)
    except ValueError:
        return 1


FLAG_TYPES = {float: float, int: int, str: str, list: _floats}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"], help="output format")
    common.add_argument("--seed", type=int, default=0, help="seed for multistart scans (default 0)")
    common.add_argument("--jobs", type=int, default=None,
                        help="worker threads (default: $FASTDRIVE_JOBS or 1)")
    common.add_argument("--timestamps", action="store_true", help="add a generation timestamp to the header")

    parser = argparse.ArgumentParser(prog="fastdrive", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fastdrive {__version__}")
    parser.add_argument("--config", help="run a JSON experiment config instead of a subcommand")
    sub = parser.add_subparsers(dest="command")
    helps = {
        "qubit": "closed qubit jump savings versus alpha, fast-driving against exact",
        "erasure": "two-level dot erasure: optimal gaps and savings",
        "ising-classical": "classical Ising chain temperature scan",
        "ising-quantum": "transverse-field Ising chain temperature scan",
        "optimize": "optimal jump point for a JSON model descriptor",
        "exact": "exact versus fast-driving work statistics over a duration sweep",
        "sweep": "Pareto sweep of power against constancy savings for the dot",
    }
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        for key, param in schema.items():
            flag = "--" + key.replace("_", "-")
            if param.kind is bool:
                sp.add_argument(flag, dest=key, action="store_const", const=True, default=None)
            else:
                sp.add_argument(flag, dest=key, type=FLAG_TYPES[param.kind], default=None,
                                help=f"default: {param.default}")
    return parser


def config_from_args(args) -> ExperimentConfig:
    schema = SCHEMAS[args.command]
    params = {k: getattr(args, k) for k in schema if getattr(args, k) is not None}
    if args.command == "optimize" and "box" in params:
        params["box"] = [params["box"][i:i + 2] for i in range(0, len(params["box"]), 2)]
    fmt = args.format or ("json" if args.command in ("erasure", "optimize") else "csv")
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    return build_config({"command": args.command, "params": params, "output": args.output, "seed": args.seed,
                         "format": fmt, "jobs": jobs, "timestamps": args.timestamps})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            try:
                with open(args.config, encoding="utf-8") as fh:
                    config = validate_config(fh.read())
            except OSError as exc:
                raise ConfigError([f"config: cannot read {args.config!r}: {exc}"]) from exc
        elif args.command is None:
            parser.print_usage(sys.stderr)
            print("fastdrive: error: a subcommand or --config is required", file=sys.stderr)
            return EXIT_USAGE
        else:
            config = config_from_args(args)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"fastdrive: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
