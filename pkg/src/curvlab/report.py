"""Structured run reports with deterministic serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional

from .errors import IoFailure


@dataclass
class CheckRecord:
    check: str
    manifold: str
    value: float
    residual: Optional[float]
    tol: Optional[float]
    passed: bool


@dataclass
class Report:
    """Command echo plus per-check records; overall pass iff every record passes."""

    command: str
    records: List[CheckRecord] = field(default_factory=list)
    verdicts: List[str] = field(default_factory=list)
    timing: float = 0.0

    def add(self, check, manifold, value, residual=None, tol=None, passed=True):
        self.records.append(CheckRecord(check, manifold, float(value),
                                        None if residual is None else float(residual),
                                        None if tol is None else float(tol),
                                        bool(passed)))

    @property
    def overall_pass(self) -> bool:
        return all(r.passed for r in self.records)


def _num(x: Optional[float]) -> str:
    if x is None:
        return "null"
    return format(float(x), ".17g")


def emit_report(report: Report, fmt: str = "text") -> str:
    """Serialize a report.

    Text mode is an aligned human table (with verdicts and timing);
    records mode is line-delimited self-describing records with numeric
    fields at 17 significant digits, byte-stable across identical runs.
    """
    if fmt == "records":
        lines = []
        for r in report.records:
            lines.append(
                "{"
                + f'"check": "{r.check}", "manifold": "{r.manifold}", '
                + f'"value": {_num(r.value)}, "residual": {_num(r.residual)}, '
                + f'"tol": {_num(r.tol)}, "pass": {"true" if r.passed else "false"}'
                + "}"
            )
        for v in report.verdicts:
            lines.append(json.dumps({"verdict": v}))
        return "\n".join(lines) + ("\n" if lines else "")
    if fmt != "text":
        raise IoFailure(f"unknown report format {fmt!r}")

    head = f"{'check':<34} {'manifold':<26} {'value':>14} {'residual':>11} {'tol':>9} pass"
    lines = [f"# {report.command}", head, "-" * len(head)]
    for r in report.records:
        res = "" if r.residual is None else f"{r.residual:.3e}"
        tol = "" if r.tol is None else f"{r.tol:.1e}"
        lines.append(
            f"{r.check:<34} {r.manifold:<26} {r.value:>14.6g} {res:>11} {tol:>9} "
            + ("PASS" if r.passed else "FAIL")
        )
    for v in report.verdicts:
        lines.append(f"verdict: {v}")
    lines.append(f"# elapsed {report.timing:.2f}s  overall {'PASS' if report.overall_pass else 'FAIL'}")
    return "\n".join(lines) + "\n"


def parse_records(text: str):
    """Round-trip parser for records mode (bit-exact on numeric fields)."""
    out = []
    for line in filter(None, text.splitlines()):
        obj = json.loads(line)
        if "verdict" in obj:
            out.append(obj)
            continue
        out.append(
            CheckRecord(
                obj["check"], obj["manifold"], obj["value"],
                obj["residual"], obj["tol"], obj["pass"],
            )
        )
    return out
