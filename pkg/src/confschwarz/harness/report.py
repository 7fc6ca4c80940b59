"""Running checks and writing reports."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import jets
from ..cocycles import CocycleError, coeff_A, coeff_B
from ..quantization import QuantizationError, coeff_alpha, coeff_d
from .checks import REGISTRY, Context
from .scenario import Scenario, ScenarioError, describe

__all__ = ["CheckRecord", "Report", "run_checks", "emit_report", "render", "FORMATS"]

FORMATS = ("json", "csv", "text")


@dataclass
class CheckRecord:
    check: str
    probe: int
    point: list[float]
    weights: str
    measured: float
    tolerance: float
    passed: bool
    sense: str = "max"
    error: str = ""

    def as_dict(self) -> dict:
        return {
            "check": self.check,
            "probe": self.probe,
            "point": [float(v) for v in self.point],
            "weights": self.weights,
            "measured": _num(self.measured),
            "tolerance": self.tolerance,
            "sense": self.sense,
            "passed": self.passed,
            "error": self.error,
        }


def _num(v: float):
    v = float(v)
    return v if np.isfinite(v) else str(v)


@dataclass
class Report:
    scenario: dict
    records: list[CheckRecord] = field(default_factory=list)
    coefficients: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def as_dict(self) -> dict:
        """Deterministic content; the wall-clock time is kept out on purpose."""
        return {
            "scenario": self.scenario,
            "summary": {"checks": len(self.records),
                        "failed": sum(not r.passed for r in self.records),
                        "passed": self.passed},
            "records": [r.as_dict() for r in self.records],
            "coefficients": self.coefficients,
            "warnings": list(self.warnings),
        }


def _table(cs) -> dict:
    return {k: str(v) for k, v in cs.values.items()}


def _coefficient_tables(s: Scenario, warnings: list[str]) -> dict:
    tables: dict = {}
    n = s.n
    modules = {REGISTRY[c].module for c in s.checks}
    if "cocycles" in modules:
        deltas = sorted({mu - lam for lam, mu in s.weights}) or \
            [Context(s, "", 0, np.zeros(n), None).delta]
        for d in deltas:
            tables.setdefault("A", {})[str(d)] = _table(coeff_A(n, d))
            if n > 2:
                tables.setdefault("B", {})[str(d)] = _table(coeff_B(n, d))
    if "quantization" in modules and n > 2:
        for lam, mu in s.weights:
            key = f"{lam},{mu}"
            for name, fn in (("alpha", coeff_alpha), ("d", coeff_d)):
                try:
                    tables.setdefault(name, {})[key] = _table(fn(n, lam, mu))
                except QuantizationError as exc:
                    warnings.append(f"{name} table for {key}: {exc}")
    for fam, override in sorted(s.audit.items()):
        warnings.append(f"audit override in effect for {fam}: "
                        + ", ".join(f"{k}={v}" for k, v in sorted(override.items())))
    return tables


def _run_one(s: Scenario, name: str, i: int, x, w) -> CheckRecord:
    spec = REGISTRY[name]
    tol = s.tolerances.get(name, spec.tol)
    label = "" if w is None else f"{s.weights[w][0]},{s.weights[w][1]}"
    err = ""
    try:
        with jets.order_budget(s.order):
            measured = float(spec.func(Context(s, name, i, x, w)))
    except jets.OrderBudgetError as exc:
        measured, err = float("nan"), f"order budget exceeded: needs K >= {exc.needed}"
    except (ArithmeticError, ValueError, CocycleError, QuantizationError) as exc:
        measured, err = float("nan"), f"{type(exc).__name__}: {exc}"
    return CheckRecord(name, i, list(map(float, x)), label, measured, tol,
                       spec.passes(measured, tol) and not err, spec.sense, err)


def run_checks(s: Scenario) -> Report:
    """Evaluate every requested check at every probe; failures never abort the run."""
    t0 = time.perf_counter()
    report = Report(describe(s))
    bad = [c for c in s.checks if not REGISTRY[c].dims(s.n)]
    if bad:
        raise ScenarioError(f"check {bad[0]!r} requires {REGISTRY[bad[0]].dim_text}",
                            "checks.names")
    report.coefficients = _coefficient_tables(s, report.warnings)
    probes = s.probes()
    records = []
    for name in sorted(set(s.checks)):
        spec = REGISTRY[name]
        weights = range(len(s.weights)) if spec.uses_weights and s.weights else [None]
        for i, x in enumerate(probes):
            for w in weights:
                records.append(_run_one(s, name, i, x, w))
    records.sort(key=lambda r: (r.check, r.probe))  # stable: weight order kept
    report.records = records
    report.wall_clock = time.perf_counter() - t0
    return report


def render(r: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(r.as_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "probe", "point", "weights", "measured", "tolerance", "sense",
                    "passed", "error"])
        for rec in r.records:
            w.writerow([rec.check, rec.probe, " ".join(f"{v:.6g}" for v in rec.point),
                        rec.weights, f"{rec.measured:.3e}", f"{rec.tolerance:.1e}", rec.sense,
                        "PASS" if rec.passed else "FAIL", rec.error])
        return buf.getvalue()
    if fmt == "text":
        lines = [f"scenario {r.scenario['name']} (n={r.scenario['dimension']}, "
                 f"signature={tuple(r.scenario['signature'])}, K={r.scenario['order']}, "
                 f"seed={r.scenario['seed']})"]
        width = max([len(rec.check) for rec in r.records] + [5])
        for rec in r.records:
            cmp = ">=" if rec.sense == "min" else "<="
            extra = f"  [{rec.weights}]" if rec.weights else ""
            tail = f"  {rec.error}" if rec.error else ""
            lines.append(f"{'PASS' if rec.passed else 'FAIL'}  {rec.check:<{width}}  "
                         f"probe {rec.probe}  {rec.measured:.3e} {cmp} {rec.tolerance:.1e}"
                         f"{extra}{tail}")
        for wmsg in r.warnings:
            lines.append(f"warning: {wmsg}")
        failed = sum(not rec.passed for rec in r.records)
        lines.append(f"{len(r.records) - failed}/{len(r.records)} passed "
                     f"in {r.wall_clock:.2f} s")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def emit_report(r: Report, fmt: str = "json", path=None) -> str:
    """Render ``r`` and write it to ``path`` (``None`` or ``"-"`` returns text only)."""
    text = render(r, fmt)
    if path not in (None, "-"):
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    return text
