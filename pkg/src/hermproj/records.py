"""Deterministic CSV and JSON writers with a metadata header.

Every file carries ``schema``, the full run configuration, the seed and the
git revision of the source tree.  CSV files put these on leading ``#`` lines
followed by one header row; floats are written with ``repr`` so reruns are
byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from pathlib import Path
from typing import Iterable, Mapping, Sequence

SCHEMA = 1
SWEEP_COLUMNS = ("d", "lambda", "mu", "mu_tilde", "p", "q", "norm", "residual", "restarts_agreeing")


def git_revision() -> str:
    """Commit hash of the checkout holding this file, or ``"unknown"``."""
    try:
        out = subprocess.run(["git", "rev-parse", "HEAD"], cwd=Path(__file__).resolve().parent,
                             capture_output=True, text=True, timeout=5, check=True)
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    rev = out.stdout.strip()
    return rev or "unknown"


def metadata(config: Mapping, seed) -> dict:
    return {"schema": SCHEMA, "config": _plain(config), "seed": seed, "git_revision": git_revision()}


def _plain(obj):
    """Convert numpy scalars, tuples and non-finite floats to JSON-safe values."""
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping) -> Path:
    """Write ``rows`` under a header of ``columns`` after ``#`` metadata lines."""
    path = Path(path)
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"# {key}: {json.dumps(_plain(value), sort_keys=True)}\n")
    w = csv.writer(buf, delimiter=",", lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} cells, expected {len(columns)}")
        w.writerow([format_cell(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")
    return path


def read_csv(path):
    """Metadata dict and rows (as string lists) of a file from :func:`write_csv`."""
    meta, body = {}, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = json.loads(value)
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def write_json(path, payload: Mapping, meta: Mapping) -> Path:
    path = Path(path)
    doc = dict(_plain(meta))
    doc.update(_plain(payload))
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="")
    return path
