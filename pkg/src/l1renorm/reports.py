"""Verification reports and deterministic CSV/JSON artifact writers.

Artifacts are byte-reproducible for a fixed configuration: floats are
written with 17 significant digits (lossless round-trip), JSON keys are
sorted, and volatile data (wall-clock timing) never reaches the files.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "CheckRow",
    "VerificationReport",
    "fmt17",
    "write_json",
    "write_csv",
    "jsonable",
]


def fmt17(x) -> str:
    """Decimal-point float format with 17 significant digits."""
    return format(float(x), ".17g")


def jsonable(value):
    """Recursively convert numpy containers to plain JSON types."""
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


@dataclass(frozen=True)
class CheckRow:
    """One verified inequality: lhs vs rhs with the claim it instantiates."""

    name: str
    paper_anchor: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_anchor": self.paper_anchor,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
            "pass": bool(self.passed),
            "note": self.note,
        }


@dataclass
class VerificationReport:
    """Result bundle of one verification suite."""

    suite: str
    constants: dict
    checks: list[CheckRow] = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)
    timing: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, anchor: str, lhs: float, rhs: float,
            relation: str = ">=", note: str = "", slack: float = 0.0) -> CheckRow:
        """Record the check `lhs relation rhs`; margin is the pass slack
        (positive iff the check passes with room)."""
        lhs = float(lhs)
        rhs = float(rhs)
        if relation == ">=":
            passed = lhs >= rhs - slack
            margin = lhs - rhs
        elif relation == "<=":
            passed = lhs <= rhs + slack
            margin = rhs - lhs
        else:
            raise ValueError("relation must be '>=' or '<='")
        row = CheckRow(name, anchor, lhs, rhs, margin, bool(passed), note)
        self.checks.append(row)
        return row

    def to_artifact_dict(self) -> dict:
        """JSON form for on-disk artifacts.

        Timing is deliberately dropped so reruns with an identical
        configuration produce byte-identical files; it is still available
        on the in-memory report (and printed by the CLI).  The config
        echo likewise omits the output directory, which names the
        artifact's location rather than the experiment.
        """
        echo = {k: v for k, v in self.config_echo.items() if k != "output_dir"}
        return {
            "suite": self.suite,
            "constants": jsonable(self.constants),
            "checks": [c.to_dict() for c in self.checks],
            "config_echo": jsonable(echo),
            "pass": self.passed,
        }

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            extra = f"  ({c.note})" if c.note else ""
            lines.append(
                f"[{status}] {self.suite}/{c.name}: lhs={fmt17(c.lhs)} "
                f"rhs={fmt17(c.rhs)} margin={fmt17(c.margin)}{extra}")
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"[{verdict}] suite {self.suite} "
                     f"({len(self.checks)} checks, {self.timing:.2f}s)")
        return lines


def write_json(path: str, payload: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text + "\n")


def write_csv(path: str, header: Iterable[str], rows: Iterable[Iterable]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, str):
                    cells.append(cell)
                elif isinstance(cell, (bool, np.bool_)):
                    cells.append("true" if cell else "false")
                elif isinstance(cell, (int, np.integer)):
                    cells.append(str(int(cell)))
                else:
                    cells.append(fmt17(cell))
            handle.write(",".join(cells) + "\n")
