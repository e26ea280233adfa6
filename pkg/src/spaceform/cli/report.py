"""Deterministic JSON reports and CSV exports."""

from __future__ import annotations

import csv
import io
import json
import math

import numpy as np


def clean(v):
    """JSON-safe copy: arrays to lists, non-finite floats to None."""
    if isinstance(v, dict):
        return {str(k): clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return clean(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def dumps(report: dict) -> str:
    return json.dumps(clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def csv_rows(report: dict) -> list[list]:
    rows = [["target", "predicate", "param", "residual", "status"]]
    for t in report["targets"]:
        for res in t["results"]:
            for rec in res.get("samples", []):
                if "param" not in rec:
                    continue
                r = rec.get("residual")
                rows.append([
                    t["id"],
                    rec.get("predicate", res["predicate"]),
                    " ".join(repr(float(x)) for x in rec["param"]),
                    "" if r is None or not math.isfinite(r) else repr(float(r)),
                    rec.get("status", ""),
                ])
    return rows


def csv_text(report: dict) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(csv_rows(report))
    return buf.getvalue()
