"""Artifact writers: RFC-4180 CSV, JSON reports, config fingerprints."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

__version__ = "0.1.0"


def fingerprint(payload: dict) -> str:
    """Stable short hash of a JSON-serializable description."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def format_float(v: float) -> str:
    return f"{float(v):.17g}"


def write_csv(path, header, rows) -> None:
    """CSV with header row, CRLF line endings, 17-significant-digit floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def write_json_report(path, payload: dict, config_fingerprint: str) -> dict:
    """JSON report with stable key ordering, embedding fingerprint and version."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    full = dict(payload)
    full["config_fingerprint"] = config_fingerprint
    full["tool_version"] = __version__
    with open(path, "w") as fh:
        json.dump(full, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return full


def path_rows(path_obj):
    for k in range(len(path_obj.grid)):
        yield (
            float(path_obj.grid[k]),
            float(path_obj.x[k]),
            float(path_obj.m[k]),
            float(path_obj.i[k]),
            float(path_obj.w[k]),
        )


def write_path_csv(file_path, path_obj) -> None:
    """Path export with columns t, x, m, i, w."""
    write_csv(file_path, ["t", "x", "m", "i", "w"], path_rows(path_obj))


def write_field_csv(file_path, field) -> None:
    """Derivative-field export as (j, k, d) triples over the occupied triangle."""

    def rows():
        n = field.n_steps
        for j in range(n + 1):
            for k in range(j, n + 1):
                yield (j, k, float(field.d[j, k]))

    write_csv(file_path, ["j", "k", "d"], rows())
