"""JSON and CSV reports with decimal-string numerics, and baseline comparison."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict
from datetime import datetime, timezone
from fractions import Fraction
from typing import Optional

from gmpy2 import mpc

from .catalog import CATALOG_VERSION
from .precision import complex_decimal, decimal_digits, real_decimal
from .verify import STATUSES, SampleConfig, SuiteReport, VerificationRecord

SCHEMA = "qlv-report/1"
CSV_FIELDS = [
    "kind", "identity", "n", "index", "status", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "abs_err", "rel_err",
    "radius_used", "err_estimate", "roundoff", "precision_bits", "detail", "point",
]


def real_str(x: Optional[float]) -> Optional[str]:
    """Shortest decimal string that round-trips the double."""
    return None if x is None else repr(float(x))


def _value(v, bits: int):
    if v is None:
        return None
    if isinstance(v, Fraction):
        return [str(v), "0"]
    if isinstance(v, mpc):
        return [real_decimal(v.real, decimal_digits(bits)), real_decimal(v.imag, decimal_digits(bits))]
    return complex_decimal(v, bits)


def _point(point):
    if point is None:
        return None
    out = {}
    for key, v in point.items():
        if isinstance(v, Fraction):
            out[key] = str(v)
        elif isinstance(v, list):
            out[key] = [str(u) if isinstance(u, Fraction) else u for u in v]
        else:
            out[key] = v
    return out


def record_to_json(rec: VerificationRecord) -> dict:
    bits = rec.precision_bits or 128
    return {
        "kind": rec.kind,
        "identity": rec.identity,
        "n": rec.n,
        "index": rec.index,
        "status": rec.status,
        "point": _point(rec.point),
        "lhs": _value(rec.lhs, bits),
        "rhs": _value(rec.rhs, bits),
        "abs_err": real_str(rec.abs_err),
        "rel_err": real_str(rec.rel_err),
        "radius_used": rec.radius_used,
        "err_estimate": real_str(rec.err_estimate),
        "roundoff": real_str(rec.roundoff),
        "precision_bits": rec.precision_bits,
        "detail": rec.detail,
    }


def config_to_json(config: SampleConfig) -> dict:
    raw = asdict(config)
    out = {}
    for key, v in raw.items():
        if isinstance(v, float):
            out[key] = real_str(v)
        elif isinstance(v, dict):
            out[key] = {k: real_str(u) if isinstance(u, float) else u for k, u in v.items()}
        elif isinstance(v, tuple):
            out[key] = [real_str(u) if isinstance(u, float) else u for u in v]
        else:
            out[key] = v
    return out


def manifest(report: SuiteReport, timestamp: Optional[str] = None) -> dict:
    totals = report.counts()
    return {
        "config": config_to_json(report.config),
        "catalog_version": CATALOG_VERSION,
        "timestamp": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "records": len(report.records),
        "totals": totals,
        "entries": [
            {
                "kind": s.kind,
                "key": s.key,
                "counts": s.counts,
                "worst_rel_err": real_str(s.worst_rel_err),
                "max_radius": s.max_radius,
            }
            for s in report.summaries()
        ],
    }


def report_to_json(report: SuiteReport, timestamp: Optional[str] = None) -> dict:
    return {
        "schema": SCHEMA,
        "manifest": manifest(report, timestamp),
        "records": [record_to_json(r) for r in report.records],
    }


def dumps(data: dict) -> str:
    return json.dumps(data, indent=1, sort_keys=False) + "\n"


def csv_rows(records: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        lhs = r.get("lhs") or [None, None]
        rhs = r.get("rhs") or [None, None]
        writer.writerow({
            "kind": r["kind"], "identity": r["identity"], "n": r["n"], "index": r["index"], "status": r["status"],
            "lhs_re": lhs[0], "lhs_im": lhs[1], "rhs_re": rhs[0], "rhs_im": rhs[1],
            "abs_err": r["abs_err"], "rel_err": r["rel_err"], "radius_used": r["radius_used"],
            "err_estimate": r["err_estimate"], "roundoff": r["roundoff"], "precision_bits": r["precision_bits"],
            "detail": r["detail"], "point": json.dumps(r["point"], sort_keys=True) if r["point"] is not None else "",
        })
    return buf.getvalue()


def write_report(report, fmt: str, destination: str, timestamp: Optional[str] = None,
                 config: Optional[SampleConfig] = None) -> str:
    """Write ``report.json`` or ``report.csv`` under ``destination`` (a directory); return the path.

    ``report`` is a SuiteReport or a plain list of records (described by ``config``).
    """
    if not isinstance(report, SuiteReport):
        report = SuiteReport(config or SampleConfig(), list(report))
    os.makedirs(destination, exist_ok=True)
    data = report_to_json(report, timestamp)
    if fmt == "json":
        path = os.path.join(destination, "report.json")
        text = dumps(data)
    elif fmt == "csv":
        path = os.path.join(destination, "report.csv")
        text = csv_rows(data["records"])
    else:
        raise ValueError(f"unknown format {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def read_report(source: str) -> dict:
    path = os.path.join(source, "report.json") if os.path.isdir(source) else source
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema") != SCHEMA:
        raise ValueError(f"{path}: unsupported report schema {data.get('schema')!r}")
    return data


def without_timestamp(data: dict) -> dict:
    out = json.loads(json.dumps(data))
    out["manifest"].pop("timestamp", None)
    return out


def compare_reports(old: dict, new: dict) -> list[str]:
    """Regressions: a record that passed and no longer does, or a worst rel_err growing more than 10x."""
    problems = []
    key = lambda r: (r["kind"], r["identity"], r["n"], r["index"])
    before = {key(r): r for r in old["records"]}
    for r in new["records"]:
        prev = before.get(key(r))
        if prev is not None and prev["status"] == "PASS" and r["status"] != "PASS":
            problems.append(f"{r['identity']} n={r['n']} #{r['index']}: PASS -> {r['status']}")
    worst_old = {(e["kind"], e["key"]): e["worst_rel_err"] for e in old["manifest"]["entries"]}
    for e in new["manifest"]["entries"]:
        prev = worst_old.get((e["kind"], e["key"]))
        if prev is None or e["worst_rel_err"] is None:
            continue
        a, b = float(prev), float(e["worst_rel_err"])
        if b > 10 * a and b > 0:
            problems.append(f"{e['key']}: worst rel_err {a:.3g} -> {b:.3g}")
    return problems


def exit_code(statuses) -> int:
    """0 all PASS/SKIP, 2 any FAIL, 3 inconclusive (NO_CONVERGENCE or POLE) without FAIL."""
    statuses = list(statuses)
    if "FAIL" in statuses:
        return 2
    if "NO_CONVERGENCE" in statuses or "POLE" in statuses:
        return 3
    return 0


def summary_lines(report: SuiteReport) -> list[str]:
    lines = []
    for s in report.summaries():
        counts = " ".join(f"{k}={v}" for k, v in s.counts.items() if v)
        worst = f"{s.worst_rel_err:.2e}" if s.worst_rel_err is not None else "-"
        lines.append(f"{s.kind:8s} {s.key:40s} {counts:30s} worst_rel_err={worst} max_radius={s.max_radius}")
    totals = report.counts()
    lines.append("total " + " ".join(f"{k}={totals[k]}" for k in STATUSES))
    return lines
