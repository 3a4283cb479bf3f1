"""Machine-readable reports: records, JSON and CSV emission.

JSON layout (schema_version "1"), keys always in this order::

    {"schema_version": "1", "command": str, "config": {...},
     "records": [{"name", "paper_anchor", "status", "values", "witnesses", "runtime"}]}

``status`` is one of pass / fail / measured.  Floats carry 17 significant
digits; non-finite floats are written as null.  ``runtime`` is null unless
timings were requested, so equal inputs give byte-identical output.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import InvalidParameter

SCHEMA_VERSION = "1"
STATUSES = ("pass", "fail", "measured")
FORMATS = ("json", "csv")


@dataclass
class Record:
    name: str
    paper_anchor: str
    status: str
    values: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    runtime: float | None = None
    samples: Any = field(default=None, repr=False)    # RatioReport with samples, CSV only

    def __post_init__(self):
        if self.status not in STATUSES:
            raise InvalidParameter(f"status must be one of {STATUSES}")
        if not self.paper_anchor:
            raise InvalidParameter("every record needs an anchor (or 'plumbing')")

    @classmethod
    def check(cls, name: str, anchor: str, ok: bool, values: dict, witnesses=None, runtime=None) -> "Record":
        return cls(name, anchor, "pass" if ok else "fail", values, list(witnesses or []), runtime)


@dataclass
class Report:
    command: str
    config: dict = field(default_factory=dict)
    records: list[Record] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    @property
    def failed(self) -> list[Record]:
        return [r for r in self.records if r.status == "fail"]

    @property
    def passed(self) -> bool:
        return not self.failed

    def add(self, record: Record) -> Record:
        self.records.append(record)
        return record


# ------------------------------------------------------------------ JSON

def _plain(v):
    """Convert numpy scalars/arrays and tuples to JSON-ready Python values."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (np.floating, float)):
        return float(v)
    return v


def _dump(v, out: list[str]) -> None:
    if v is None:
        out.append("null")
    elif isinstance(v, bool):
        out.append("true" if v else "false")
    elif isinstance(v, int):
        out.append(str(v))
    elif isinstance(v, float):
        if not math.isfinite(v):
            out.append("null")
        elif v == int(v) and abs(v) < 1e16:
            out.append(format(v, ".1f"))
        else:
            out.append(format(v, ".17g"))
    elif isinstance(v, str):
        out.append(json.dumps(v, ensure_ascii=False))
    elif isinstance(v, list):
        out.append("[")
        for i, x in enumerate(v):
            if i:
                out.append(", ")
            _dump(x, out)
        out.append("]")
    elif isinstance(v, dict):
        out.append("{")
        for i, (k, x) in enumerate(v.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _dump(x, out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialise {type(v).__name__}")


def record_dict(r: Record) -> dict:
    return {"name": r.name, "paper_anchor": r.paper_anchor, "status": r.status,
            "values": _plain(r.values), "witnesses": _plain(r.witnesses),
            "runtime": None if r.runtime is None else float(r.runtime)}


def report_dict(report: Report) -> dict:
    return {"schema_version": report.schema_version, "command": report.command,
            "config": _plain(report.config), "records": [record_dict(r) for r in report.records]}


def to_json(report: Report) -> str:
    out: list[str] = []
    head = report_dict(report)
    records = head.pop("records")
    out.append("{")
    for k, v in head.items():
        out.append(f"\n  {json.dumps(k)}: ")
        _dump(v, out)
        out.append(",")
    out.append('\n  "records": [')
    for i, r in enumerate(records):
        out.append("\n    " if i == 0 else ",\n    ")
        _dump(r, out)
    out.append("\n  ]\n}\n" if records else "]\n}\n")
    return "".join(out)


def load_report(text: str | bytes) -> dict:
    return json.loads(text)


# ------------------------------------------------------------------- CSV

def _fmt(v: float) -> str:
    v = float(v)
    return "" if not math.isfinite(v) else format(v, ".17g")


def scan_csv(scan) -> str:
    """One row per sample: coordinates, kernel, bound, ratio, and the log columns."""
    if scan.samples is None:
        raise InvalidParameter(f"scan {scan.name} was run without keeping samples")
    keys = list(scan.samples)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys + ["kernel", "bound", "ratio", "log_kernel", "log_bound"])
    n = len(scan.ratios)
    lk = scan.log_kernel if scan.log_kernel is not None else np.full(n, np.nan)
    lb = scan.log_bound if scan.log_bound is not None else np.full(n, np.nan)
    cols = [np.asarray(scan.samples[k], float) for k in keys]
    for i in range(n):
        w.writerow([_fmt(c[i]) for c in cols]
                   + [_fmt(math.exp(lk[i])) if math.isfinite(lk[i]) else "",
                      _fmt(math.exp(lb[i])) if math.isfinite(lb[i]) else "",
                      _fmt(scan.ratios[i]), _fmt(lk[i]), _fmt(lb[i])])
    return buf.getvalue()


def records_csv(report: Report) -> str:
    """Summary table for reports without per-sample data."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "paper_anchor", "status", "values"])
    for r in report.records:
        vals = []
        _dump(_plain(r.values), vals)
        w.writerow([r.name, r.paper_anchor, r.status, "".join(vals)])
    return buf.getvalue()


def emit_report(report: Report, fmt: str = "json") -> bytes:
    if fmt not in FORMATS:
        raise InvalidParameter(f"format must be one of {FORMATS}")
    if fmt == "json":
        return to_json(report).encode()
    with_samples = [r.samples for r in report.records if r.samples is not None]
    if len(with_samples) == 1:
        return scan_csv(with_samples[0]).encode()
    return records_csv(report).encode()
