"""CSV and JSON output with a ``#``-prefixed metadata header."""

from __future__ import annotations

import csv
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__

UNIT_NOTE = "hbar = k_B = 1; energies in units of the model's J (or eps_B), times in matching inverse units"


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.12g" % float(v)
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else None
    return obj


def build_metadata(config, extra=None, timestamps=False) -> dict:
    meta = {
        "tool": f"fastdrive {__version__}",
        "units": UNIT_NOTE,
        "config": config.to_dict() if config is not None else None,
    }
    if timestamps:
        meta["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if extra:
        meta.update(extra)
    return _jsonable(meta)


def render_csv(columns, rows, metadata: dict) -> str:
    """``columns`` is a list of ``(name, description)``; ``rows`` a list of dicts or sequences."""
    buf = io.StringIO()
    for key, value in metadata.items():
        text = json.dumps(value, sort_keys=True) if not isinstance(value, str) else value
        buf.write(f"# {key}: {text}\n")
    buf.write("# columns:\n")
    for name, doc in columns:
        buf.write(f"#   {name}: {doc}\n")
    writer = csv.writer(buf, lineterminator="\n")
    names = [c[0] for c in columns]
    writer.writerow(names)
    for row in rows:
        values = [row[n] for n in names] if isinstance(row, dict) else list(row)
        writer.writerow([format_value(v) for v in values])
    return buf.getvalue()


def render_json(payload, metadata: dict) -> str:
    return json.dumps({"metadata": metadata, "result": _jsonable(payload)}, indent=2, sort_keys=True) + "\n"


def emit(text: str, path=None):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_csv_body(text: str) -> list[list[str]]:
    """Rows of a rendered CSV without its comment header (first row is the column names)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))
