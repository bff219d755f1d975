"""Branch export and import in CSV and JSON.

CSV files begin with a versioned comment line followed by a fixed header.
JSON files carry ``schema_version`` and the colour legend for the stability
labels.  Non-finite values (infinite multipliers, undefined marker parameters) are
written as empty CSV cells or JSON ``null``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .stability import COLORS

SCHEMA_VERSION = 1
CSV_MAGIC = f"# releq branch export v{SCHEMA_VERSION}"
CSV_COLUMNS = ["branch_id", "lambda", "x", "y", "z", "j", "h", "stability"]


def _num(v) -> Optional[float]:
    v = float(v)
    return None if not math.isfinite(v) else v


def _fmt(v) -> str:
    v = float(v)
    return "" if not math.isfinite(v) else repr(v)


def branch_rows(branch) -> list[list]:
    labels = branch.stability or [""] * len(branch)
    rows = []
    for k in range(len(branch)):
        mu = branch.mu[k]
        rows.append([branch.branch_id, branch.lam[k], mu[0], mu[1], mu[2],
                     branch.j[k], branch.h[k], labels[k]])
    return rows


def branches_to_csv(branches: Iterable) -> str:
    buf = _io.StringIO()
    buf.write(CSV_MAGIC + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for b in branches:
        for r in branch_rows(b):
            w.writerow([r[0]] + [_fmt(v) for v in r[1:7]] + [r[7]])
    return buf.getvalue()


def branch_to_dict(branch) -> dict:
    out = {
        "branch_id": int(branch.branch_id),
        "kind": branch.kind,
        "lambda_interval": [_num(v) for v in branch.lam_interval],
        "contains_origin": bool(branch.contains_origin),
        "wraps_infinity": bool(branch.wraps_infinity),
        "markers": [
            {
                "kind": m.kind,
                "lambda": _num(m.lam),
                "mu": [float(v) for v in m.mu],
                "param": _num(m.param),
                "index": int(m.index),
                "partner": m.partner,
            }
            for m in branch.markers
        ],
        "samples": {
            "param": [float(v) for v in branch.param],
            "lambda": [_num(v) for v in branch.lam],
            "mu": [[float(v) for v in p] for p in branch.mu],
            "j": [float(v) for v in branch.j],
            "h": [float(v) for v in branch.h],
            "stability": list(branch.stability) if branch.stability is not None else None,
        },
    }
    if branch.stability is not None:
        out["samples"]["color"] = [COLORS.get(s, "") for s in branch.stability]
    return out


def branches_to_json(branches: Iterable, meta: Optional[dict] = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "color_legend": dict(COLORS),
        "meta": meta or {},
        "branches": [branch_to_dict(b) for b in branches],
    }
    return dumps(doc)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False) + "\n"


TRAJECTORY_COLUMNS = ["t", "x", "y", "z", "h", "j"]


def trajectory_to_csv(traj) -> str:
    buf = _io.StringIO()
    buf.write(f"# releq trajectory v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    for t, x, y, z, h, j in traj.rows():
        w.writerow([repr(float(v)) for v in (t, x, y, z, h, j)])
    return buf.getvalue()


def read_csv(path_or_text) -> dict[int, dict]:
    """Parse a CSV export into ``{branch_id: {"lambda", "mu", "j", "h", "stability"}}``."""
    text = _text(path_or_text)
    lines = text.splitlines()
    if not lines or lines[0].strip() != CSV_MAGIC:
        raise ValueError("not a releq branch export (missing version line)")
    rdr = csv.reader(lines[1:])
    header = next(rdr)
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected columns {header}")
    out: dict[int, dict] = {}
    for row in rdr:
        bid = int(row[0])
        d = out.setdefault(bid, {"lambda": [], "mu": [], "j": [], "h": [], "stability": []})
        d["lambda"].append(float(row[1]) if row[1] else math.inf)
        d["mu"].append([float(v) for v in row[2:5]])
        d["j"].append(float(row[5]))
        d["h"].append(float(row[6]))
        d["stability"].append(row[7])
    for d in out.values():
        d["mu"] = np.array(d["mu"])
        for k in ("lambda", "j", "h"):
            d[k] = np.array(d[k])
    return out


def read_json(path_or_text) -> dict:
    doc = json.loads(_text(path_or_text))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')}")
    for b in doc["branches"]:
        s = b["samples"]
        s["mu"] = np.array(s["mu"], dtype=float).reshape(-1, 3)
        s["lambda"] = np.array([math.inf if v is None else v for v in s["lambda"]])
    return doc


def _text(src) -> str:
    if isinstance(src, Path):
        return src.read_text()
    if isinstance(src, str) and "\n" not in src and Path(src).exists():
        return Path(src).read_text()
    return src
