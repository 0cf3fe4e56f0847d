"""Tabular records for the CLI: column layout, CSV/JSON writers and record schemas."""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np

from .scattering import ScanRecord, SMatrixPair

COEFFICIENTS = ("t1", "t2", "r1", "r2")


def fmt(x) -> str:
    """17 significant digits: round-trip safe for binary64."""
    return format(float(x), ".17g")


def _clean(x):
    if x is None:
        return None
    x = float(x)
    return None if not math.isfinite(x) else float(fmt(x))


def _matrix_columns(prefix: str, n: int) -> list:
    return [f"{prefix}_{i}{j}_{part}" for i in range(1, n + 1) for j in range(1, n + 1)
            for part in ("re", "im")]


def _matrix_values(m, n):
    if m is None:
        return [None] * (2 * n * n)
    m = np.asarray(m)
    return [v for z in m.reshape(-1) for v in (z.real, z.imag)]


def scan_columns(n: int) -> list:
    cols = ["E", "k0_re", "k0_im"]
    for name in COEFFICIENTS:
        cols += _matrix_columns(name, n)
    return cols + ["residual", "flag"]


def scan_row(rec: ScanRecord, n: int) -> dict:
    vals = [rec.energy.E.real, rec.energy.k0.real, rec.energy.k0.imag]
    co = rec.coefficients
    for name in COEFFICIENTS:
        vals += _matrix_values(getattr(co, name) if co is not None else None, n)
    row = dict(zip(scan_columns(n)[:-2], (_clean(v) for v in vals)))
    row["residual"] = _clean(rec.duality_residual)
    row["flag"] = rec.flag
    return row


def scatter_columns(n: int) -> list:
    return scan_columns(n) + _matrix_columns("s_plus", 2 * n) + _matrix_columns("s_minus", 2 * n)


def scatter_row(rec: ScanRecord, pair: SMatrixPair | None, n: int) -> dict:
    row = scan_row(rec, n)
    for name in ("s_plus", "s_minus"):
        m = getattr(pair, name).data if pair is not None else None
        row.update(zip(_matrix_columns(name, 2 * n),
                       (_clean(v) for v in _matrix_values(m, 2 * n))))
    return row


EVOLVE_COLUMNS = ["t", "norm_re", "norm_im", "max_psi_r", "max_psi_l"]


def evolve_rows(trajectory) -> list:
    rows = []
    for snap in trajectory:
        f = snap.fields
        vals = [snap.t, snap.norm.real, snap.norm.imag,
                float(np.max(np.abs(f.psi_r))), float(np.max(np.abs(f.psi_l)))]
        rows.append(dict(zip(EVOLVE_COLUMNS, (_clean(v) for v in vals))))
    return rows


def to_csv(columns, rows, comments=()) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row[c] is None else (row[c] if isinstance(row[c], str)
                                                      else fmt(row[c])) for c in columns])
    for line in comments:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def to_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def parse_csv(text: str) -> list:
    """Rows of a CSV emitted by :func:`to_csv` as dicts (numbers as float, blanks as None)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append({k: (v if k == "flag" else (None if v == "" else float(v)))
                    for k, v in row.items()})
    return out


_nullable = {"type": ["number", "null"]}


def row_schema(columns) -> dict:
    props = {c: ({"type": "string"} if c == "flag" else _nullable) for c in columns}
    return {"type": "object", "properties": props, "required": list(columns),
            "additionalProperties": False}


def scan_document_schema(n: int) -> dict:
    return {"type": "object", "additionalProperties": False,
            "required": ["channels", "records"],
            "properties": {"channels": {"const": n},
                           "records": {"type": "array", "items": row_schema(scan_columns(n))}}}


def scatter_document_schema(n: int) -> dict:
    return row_schema(scatter_columns(n))


def evolve_document_schema() -> dict:
    return {"type": "object", "additionalProperties": False,
            "required": ["rows", "max_norm_drift", "delta_width"],
            "properties": {"rows": {"type": "array", "items": row_schema(EVOLVE_COLUMNS)},
                           "max_norm_drift": {"type": "number"},
                           "delta_width": {"type": "number"}}}
