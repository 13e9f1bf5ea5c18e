"""Recomputation of the published per-patient results table."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..errors import FormatError
from .metrics import aggregate
from .report import histogram
from .wilcoxon import wilcoxon_signed_rank

PUBLISHED = {"baseline": 74.57, "synthetic": 75.78, "difference": 1.21, "p_value": 0.0098,
             "improved": 20, "degraded": 4}


@dataclass(frozen=True)
class TableRow:
    patient: str
    baseline: float
    synthetic: float
    difference: float
    excluded: bool


def load_table(path: str | Path | None = None) -> list[TableRow]:
    """Rows of the bundled fixture, or of ``path`` in the same CSV layout."""
    if path is None:
        text = resources.files(__package__).joinpath("fixtures/table1.csv").read_text()
    else:
        try:
            text = Path(path).read_text()
        except FileNotFoundError:
            raise FileNotFoundError(f"results table {path} not found") from None
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        try:
            rows.append(TableRow(rec["patient"], float(rec["baseline"]), float(rec["synthetic"]),
                                 float(rec["difference"]), rec["excluded"].strip() == "1"))
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"bad results-table row {rec}: {e}") from None
    if not rows:
        raise FormatError("results table is empty")
    return rows


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    expected: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return abs(self.value - self.expected) <= self.tolerance + 1e-12

    def line(self) -> str:
        return (f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.4f} "
                f"(expected {self.expected} +/- {self.tolerance})")


def verify_table(rows: list[TableRow], total_tol: float = 0.15, diff_tol: float = 0.1,
                 p_tol: float = 0.003) -> list[Check]:
    """Totals, difference, the >1 point improvement/degradation counts and the test p-value."""
    kept = [r for r in rows if not r.excluded]
    totals = aggregate([r.patient for r in rows], [r.baseline for r in rows],
                       [r.synthetic for r in rows], [r.patient for r in rows if r.excluded])
    diffs = [r.difference for r in kept]
    bins = histogram(diffs, 1.0)
    improved = sum(c for lo, _, c in bins if lo >= 1.0) - sum(d == 1.0 for d in diffs)
    degraded = sum(c for _, hi, c in bins if hi <= -1.0)
    test = wilcoxon_signed_rank(diffs)
    return [
        Check("baseline total", totals.baseline, PUBLISHED["baseline"], total_tol),
        Check("synthetic total", totals.synthetic, PUBLISHED["synthetic"], total_tol),
        Check("total difference", totals.difference, PUBLISHED["difference"], diff_tol),
        Check("patients improving by more than 1 point", improved, PUBLISHED["improved"], 0),
        Check("patients degrading by more than 1 point", degraded, PUBLISHED["degraded"], 0),
        Check("wilcoxon two-sided p", test.p_value, PUBLISHED["p_value"], p_tol),
    ]
