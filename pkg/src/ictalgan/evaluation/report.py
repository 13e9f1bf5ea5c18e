"""Experiment report, histogram and their file forms."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .metrics import aggregate


def histogram(values: Sequence[float], width: float = 1.0) -> list[tuple[float, float, int]]:
    """Counts over bins [k*width, (k+1)*width) spanning the data; empty input gives []."""
    if not values:
        return []
    lo = math.floor(min(values) / width)
    hi = math.floor(max(values) / width)
    counts = [0] * (hi - lo + 1)
    for v in values:
        counts[math.floor(v / width) - lo] += 1
    return [((lo + i) * width, (lo + i + 1) * width, c) for i, c in enumerate(counts)]


@dataclass
class PatientResult:
    patient_id: str
    baseline: float  # mean gmean over repeats, in [0, 1]
    synthetic: float
    baseline_sd: float
    synthetic_sd: float
    repeats: int
    baseline_runs: list[float] = field(default_factory=list)
    synthetic_runs: list[float] = field(default_factory=list)

    @property
    def difference(self) -> float:
        return self.synthetic - self.baseline


@dataclass
class ExperimentReport:
    rows: list[PatientResult]
    excluded: list[str]
    skipped: dict[str, str]
    baseline_total: float
    synthetic_total: float
    wilcoxon_statistic: float
    wilcoxon_p: float
    wilcoxon_method: str
    histogram: list[tuple[float, float, int]]
    config: dict = field(default_factory=dict)

    @property
    def total_difference(self) -> float:
        return self.synthetic_total - self.baseline_total

    @property
    def included(self) -> list[PatientResult]:
        return [r for r in self.rows if r.patient_id not in self.excluded]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total_difference"] = self.total_difference
        for row, src in zip(d["rows"], self.rows):
            row["difference"] = src.difference
        d["histogram"] = [list(b) for b in self.histogram]
        return d

    def check_consistency(self, tol: float = 1e-9) -> list[str]:
        """Problems found when recomputing totals and histogram from the rows."""
        problems = []
        if not self.included:
            return problems if not self.rows else ["no included patients"]
        totals = aggregate([r.patient_id for r in self.rows], [r.baseline for r in self.rows],
                           [r.synthetic for r in self.rows], self.excluded)
        if abs(totals.baseline - self.baseline_total) > tol:
            problems.append(f"baseline total {self.baseline_total} != {totals.baseline}")
        if abs(totals.synthetic - self.synthetic_total) > tol:
            problems.append(f"synthetic total {self.synthetic_total} != {totals.synthetic}")
        expected = histogram([100.0 * r.difference for r in self.included], 1.0)
        if [tuple(b) for b in self.histogram] != expected:
            problems.append("histogram does not match per-patient differences")
        for r in self.rows:
            for name in ("baseline", "synthetic"):
                runs = getattr(r, f"{name}_runs")
                if runs and abs(sum(runs) / len(runs) - getattr(r, name)) > tol:
                    problems.append(f"patient {r.patient_id}: {name} mean disagrees with its runs")
        return problems


def write_json(report: ExperimentReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def write_table_csv(report: ExperimentReport, path: str | Path) -> None:
    """Per-patient percentages in the layout of the published table, plus a total row."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["patient", "baseline_pct", "synthetic_pct", "difference_pct", "baseline_sd_pct",
                    "synthetic_sd_pct", "repeats", "excluded"])
        for r in report.rows:
            w.writerow([r.patient_id, f"{100 * r.baseline:.2f}", f"{100 * r.synthetic:.2f}",
                        f"{100 * r.difference:+.2f}", f"{100 * r.baseline_sd:.2f}",
                        f"{100 * r.synthetic_sd:.2f}", r.repeats,
                        int(r.patient_id in report.excluded)])
        w.writerow(["TOTAL", f"{100 * report.baseline_total:.2f}",
                    f"{100 * report.synthetic_total:.2f}",
                    f"{100 * report.total_difference:+.2f}", "", "", "", ""])


def write_histogram_csv(bins: Sequence[tuple[float, float, int]], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_lo_pct", "bin_hi_pct", "count"])
        for lo, hi, c in bins:
            w.writerow([f"{lo:g}", f"{hi:g}", c])


def histogram_svg(bins: Sequence[tuple[float, float, int]], title: str = "") -> str:
    """A plain bar chart: x = difference in points, y = number of patients."""
    w, h, pad = 640, 360, 48
    if not bins:
        return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">'
                f'<text x="{pad}" y="{h // 2}">no data</text></svg>\n')
    lo, hi = bins[0][0], bins[-1][1]
    peak = max(c for _, _, c in bins) or 1
    sx = (w - 2 * pad) / (hi - lo)
    sy = (h - 2 * pad) / peak
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
             f'font-family="sans-serif" font-size="11">']
    if title:
        parts.append(f'<text x="{w / 2}" y="20" text-anchor="middle">{title}</text>')
    base = h - pad
    for a, b, c in bins:
        x = pad + (a - lo) * sx
        parts.append(f'<rect x="{x:.1f}" y="{base - c * sy:.1f}" width="{(b - a) * sx - 1:.1f}" '
                     f'height="{c * sy:.1f}" fill="#4a72b0"/>')
    parts.append(f'<line x1="{pad}" y1="{base}" x2="{w - pad}" y2="{base}" stroke="black"/>')
    step = max(1, round((hi - lo) / 10))
    for t in range(math.ceil(lo), math.floor(hi) + 1, step):
        x = pad + (t - lo) * sx
        parts.append(f'<text x="{x:.1f}" y="{base + 16}" text-anchor="middle">{t}</text>')
    parts.append(f'<text x="{w / 2}" y="{h - 8}" text-anchor="middle">difference (points)</text>')
    parts.append(f'<text x="14" y="{h / 2}" transform="rotate(-90 14 {h / 2})" '
                 f'text-anchor="middle">patients (max {peak})</text>')
    parts.append("</svg>\n")
    return "\n".join(parts)


def write_histogram_svg(bins, path: str | Path, title: str = "") -> None:
    Path(path).write_text(histogram_svg(bins, title))
