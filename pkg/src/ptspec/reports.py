"""Deterministic report serialization (JSON and CSV).

Identical inputs must produce byte-identical output: keys are sorted, no
timestamps are recorded, floats go through repr (shortest round-trip), and
every report embeds the resolved configuration and a schema version.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, is_dataclass
from fractions import Fraction

import numpy as np

SCHEMA_VERSION = "1"


def _plain(obj):
    """Recursively convert package objects to JSON-encodable structures."""
    if is_dataclass(obj) and not isinstance(obj, type):
        return _plain(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.complexfloating, complex)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, frozenset):
        return sorted(obj)
    return obj


def envelope(config: dict, results) -> dict:
    return {"schema_version": SCHEMA_VERSION, "config": _plain(config),
            "results": _plain(results)}


def dump_json(doc: dict) -> str:
    return json.dumps(_plain(doc), sort_keys=True, separators=(",", ":")) + "\n"


def matrix_rows(m: np.ndarray):
    """Sparse-style (row, col, re, im) rows of a dense matrix."""
    a = np.asarray(m)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            v = complex(a[i, j])
            yield [i, j, repr(v.real), repr(v.imag)]


def dump_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_output(text: str, out_path: str | None):
    if out_path is None:
        print(text, end="")
    else:
        with open(out_path, "w") as fh:
            fh.write(text)
