"""Experiment configuration: per-command parameter schemas, validation and JSON round-trip."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable

COMMANDS = ("qubit", "erasure", "ising-classical", "ising-quantum", "optimize", "exact", "sweep")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists one message per offending field."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class Param:
    kind: type
    default: Any
    check: Callable[[Any], bool] | None = None
    rule: str = ""


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _unit(x):
    return 0 <= x <= 1


def _at_least(n):
    return lambda x: x >= n


POS, NONNEG = "must be positive", "must be non-negative"

_CHAIN = {
    "j": Param(float, 1.0, _positive, POS),
    "tau_eq": Param(float, 1.0, _positive, POS),
    "t_min": Param(float, 0.1, _positive, POS),
    "t_max": Param(float, 10.0, _positive, POS),
    "points": Param(int, 40, _at_least(2), "must be at least 2"),
    "starts": Param(int, 8, _at_least(1), "must be at least 1"),
}

SCHEMAS: dict[str, dict[str, Param]] = {
    "qubit": {
        "beta_j": Param(float, 1.0, _positive, POS),
        "tau_j": Param(float, 1.0, _positive, POS),
        "alpha_max": Param(float, 1.0, _positive, POS),
        "points": Param(int, 50, _at_least(1), "must be at least 1"),
        "lambda_a": Param(list, [1.0, 0.0, 0.0]),
        "lambda_b": Param(list, [0.0, 0.0, 1.0]),
    },
    "erasure": {
        "beta_eps_b": Param(float, 50.0, _positive, POS),
        "eps_b": Param(float, 1.0, _positive, POS),
        "tau_eq": Param(float, 1.0, _positive, POS),
        "tau": Param(float, 0.01, _positive, POS),
        "objective": Param(str, "both", lambda x: x in ("power", "constancy", "both"),
                           "must be power, constancy or both"),
        "naive_nodes": Param(int, 20001, _at_least(3), "must be at least 3"),
    },
    "ising-classical": {**_CHAIN, "eps_a": Param(float, 0.0), "eps_b": Param(float, 10.0)},
    "ising-quantum": {**_CHAIN, "g_a": Param(float, 0.0), "g_b": Param(float, 3.0),
                      "max_nodes": Param(int, 4096, _at_least(64), "must be at least 64"),
                      "covariance": Param(str, "kubo-mori", lambda x: x in ("kubo-mori", "symmetric"),
                                          "must be kubo-mori or symmetric")},
    "optimize": {
        "model": Param(str, ""),
        "lambda_a": Param(list, None),
        "lambda_b": Param(list, None),
        "tau": Param(float, 1.0, _positive, POS),
        "objective": Param(str, "power", lambda x: x in ("power", "constancy", "pareto"),
                           "must be power, constancy or pareto"),
        "weight": Param(float, 0.5, _unit, "must lie in [0, 1]"),
        "raw": Param(bool, False),
        "max_norm": Param(float, None, _positive, POS),
        "box": Param(list, None),
        "starts": Param(int, 8, _at_least(1), "must be at least 1"),
    },
    "exact": {
        "model": Param(str, "dot", lambda x: x in ("dot", "qubit") or x.endswith(".json"),
                       "must be dot, qubit or a .json model descriptor"),
        "tau_sweep": Param(str, "1e-3:1e-1:15"),
        "protocol": Param(str, "jump", lambda x: x in ("jump", "linear"), "must be jump or linear"),
        "steps": Param(int, 16, _at_least(1), "must be at least 1"),
        "beta_eps_b": Param(float, 10.0, _positive, POS),
        "tau_eq": Param(float, 1.0, _positive, POS),
        "beta_j": Param(float, 1.0, _positive, POS),
        "alpha": Param(float, 0.05, _nonneg, NONNEG),
        "lambda_a": Param(list, None),
        "lambda_b": Param(list, None),
        "jump_point": Param(list, None),
    },
    "sweep": {
        "beta_eps_b": Param(float, 50.0, _positive, POS),
        "tau_eq": Param(float, 1.0, _positive, POS),
        "weights": Param(list, [0.0, 0.25, 0.5, 0.75, 1.0]),
        "raw": Param(bool, False),
        "starts": Param(int, 8, _at_least(1), "must be at least 1"),
    },
}

GLOBAL_KEYS = ("command", "params", "output", "seed", "format", "jobs", "timestamps")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: str | None = None
    seed: int = 0
    format: str = "csv"
    jobs: int = 1
    timestamps: bool = False

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": dict(self.params),
            "output": self.output,
            "seed": self.seed,
            "format": self.format,
            "jobs": self.jobs,
            "timestamps": self.timestamps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _coerce(name, value, param: Param, errors):
    if value is None:
        return None
    kind = param.kind
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            out = value
        elif kind is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            out = int(value)
        elif kind is float:
            if isinstance(value, bool):
                raise TypeError
            out = float(value)
            if not math.isfinite(out):
                errors.append(f"{name}: must be finite")
                return None
        elif kind is list:
            if not isinstance(value, (list, tuple)):
                raise TypeError
            out = [float(v) if not isinstance(v, (list, tuple)) else [float(u) for u in v] for v in value]
            flat = [u for v in out for u in (v if isinstance(v, list) else [v])]
            if not all(math.isfinite(u) for u in flat):
                errors.append(f"{name}: entries must be finite")
                return None
        else:
            if not isinstance(value, str):
                raise TypeError
            out = value
    except (TypeError, ValueError):
        errors.append(f"{name}: expected {kind.__name__}, got {value!r}")
        return None
    if param.check is not None and not param.check(out):
        errors.append(f"{name}: {param.rule} (got {value!r})")
        return None
    return out


def build_config(data: dict) -> ExperimentConfig:
    """Validate a decoded config mapping, collecting every error before raising."""
    if not isinstance(data, dict) or not data:
        raise ConfigError(["config: expected a non-empty JSON object"])
    errors = [f"{k}: unknown key" for k in data if k not in GLOBAL_KEYS]
    command = data.get("command")
    if command not in COMMANDS:
        errors.append(f"command: must be one of {', '.join(COMMANDS)} (got {command!r})")
        raise ConfigError(errors)
    schema = SCHEMAS[command]
    raw_params = data.get("params", {}) or {}
    if not isinstance(raw_params, dict):
        raise ConfigError(errors + ["params: expected an object"])
    errors += [f"params.{k}: unknown key for {command}" for k in raw_params if k not in schema]
    params = {}
    for name, param in schema.items():
        value = raw_params.get(name, param.default)
        params[name] = _coerce(f"params.{name}", value, param, errors) if name in raw_params else param.default
    fmt = data.get("format", "csv")
    if fmt not in FORMATS:
        errors.append(f"format: must be csv or json (got {fmt!r})")
    seed = _coerce("seed", data.get("seed", 0), Param(int, 0), errors)
    jobs = _coerce("jobs", data.get("jobs", 1), Param(int, 1, _at_least(1), "must be at least 1"), errors)
    timestamps = _coerce("timestamps", data.get("timestamps", False), Param(bool, False), errors)
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        errors.append(f"output: expected a path string, got {output!r}")
    if command in ("ising-classical", "ising-quantum") and not errors and params["t_min"] > params["t_max"]:
        errors.append("params.t_min: must not exceed t_max")
    if errors:
        raise ConfigError(errors)
    return ExperimentConfig(command, params, output, seed, fmt, jobs, timestamps)


def validate_config(text: str) -> ExperimentConfig:
    """Parse JSON config text into an :class:`ExperimentConfig`."""
    if not text or not text.strip():
        raise ConfigError(["config: empty input"])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config: invalid JSON ({exc.msg} at line {exc.lineno})"]) from exc
    return build_config(data)
