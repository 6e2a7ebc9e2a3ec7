"""Deterministic experiment outputs: report.json and CSV tables.

Every number is written with repr() (shortest round-trip form), rows are
emitted in a fixed order, and nothing time- or host-dependent enters the
files, so identical (config, seed) runs produce identical bytes no matter
how many worker threads were used.
"""

import json
import os
from dataclasses import dataclass, field


def fnum(x):
    return repr(float(x))


def mean_se(values):
    """Sample mean and its standard error (0 for fewer than 2 values)."""
    import numpy as np

    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return 0.0, 0.0
    if arr.size == 1:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / np.sqrt(arr.size))


@dataclass
class Check:
    """One acceptance rule evaluated against a tolerance."""

    name: str
    value: float
    target: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self):
        return {
            "name": self.name,
            "value": self.value,
            "target": self.target,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


def tolerance_check(name, value, target, tolerance, detail=""):
    ok = abs(value - target) <= tolerance
    return Check(name=name, value=float(value), target=float(target),
                 tolerance=float(tolerance), passed=bool(ok), detail=detail)


def predicate_check(name, passed, value=0.0, detail=""):
    return Check(name=name, value=float(value), target=0.0, tolerance=0.0,
                 passed=bool(passed), detail=detail)


@dataclass
class ExperimentReport:
    kind: str
    seed: int
    config_hash: str
    version: str
    backend: str
    mode: str
    replicates: int
    checks: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    rejected: list = field(default_factory=list)  # (replicate, reason)
    counts_rows: list = field(default_factory=list)  # dicts
    heights_rows: list = field(default_factory=list)
    catalog_rows: dict = field(default_factory=dict)  # arm -> list of rows
    extra_files: dict = field(default_factory=dict)  # filename -> text

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"

    def summary_lines(self):
        lines = [f"{self.kind}: {self.verdict} ({len(self.checks)} checks, "
                 f"{self.replicates} replicates, {len(self.rejected)} rejected)"]
        for c in self.checks:
            mark = "ok " if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: value={c.value:.6g} target={c.target:.6g} "
                         f"tol={c.tolerance:.3g} {c.detail}")
        return lines


def write_report(report, out_dir):
    """Write report.json plus any non-empty CSV tables; returns file list."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    payload = {
        "kind": report.kind,
        "seed": report.seed,
        "config_hash": report.config_hash,
        "version": report.version,
        "backend": report.backend,
        "mode": report.mode,
        "replicates": report.replicates,
        "verdict": report.verdict,
        "checks": [c.as_dict() for c in report.checks],
        "aggregates": report.aggregates,
        "rejected": [{"replicate": r, "reason": reason} for r, reason in report.rejected],
    }
    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(path)

    if report.counts_rows:
        path = os.path.join(out_dir, "counts.csv")
        _write_csv(path, ["replicate", "arm", "u", "index", "count"], report.counts_rows)
        written.append(path)
    if report.heights_rows:
        path = os.path.join(out_dir, "heights.csv")
        _write_csv(path, ["replicate", "arm", "index", "height"], report.heights_rows)
        written.append(path)
    for arm, rows in report.catalog_rows.items():
        if not rows:
            continue
        path = os.path.join(out_dir, f"catalog_{arm}.csv")
        _write_csv(path, list(rows[0].keys()), rows)
        written.append(path)
    for name, text in report.extra_files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w") as fh:
            fh.write(text)
        written.append(path)
    return written


def _write_csv(path, columns, rows):
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fields = []
            for col in columns:
                v = row[col]
                fields.append(fnum(v) if isinstance(v, float) else str(v))
            fh.write(",".join(fields) + "\n")


def catalog_rows(replicate, catalog):
    """Spec columns for a Euclidean catalog CSV."""
    rows = []
    n = catalog.dimension
    for p in catalog.points:
        row = {"replicate": replicate}
        for i in range(n):
            row[f"x{i+1}"] = float(p.location[i])
        row["height"] = float(p.height)
        row["index"] = int(p.index)
        for i in range(n):
            row[f"eig{i+1}"] = float(p.eigenvalues[i])
        row["residual"] = float(p.gradient_residual)
        row["iterations"] = int(p.newton_iterations)
        rows.append(row)
    return rows


def surface_catalog_rows(replicate, catalog):
    """Surface catalogs add ambient coordinates, chart id and chart (u, v)."""
    rows = []
    for p in catalog.points:
        rows.append({
            "replicate": replicate,
            "x": float(p.location[0]),
            "y": float(p.location[1]),
            "z": float(p.location[2]),
            "chart": int(p.chart),
            "u": float(p.chart_uv[0]),
            "v": float(p.chart_uv[1]),
            "height": float(p.height),
            "index": int(p.index),
            "eig1": float(p.eigenvalues[0]),
            "eig2": float(p.eigenvalues[1]),
            "residual": float(p.gradient_residual),
            "iterations": int(p.newton_iterations),
        })
    return rows
