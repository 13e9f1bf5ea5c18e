"""Confusion counts, geometric-mean score and cross-patient aggregation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import UsageError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfusionCounts:
    """Ictal is the positive class."""

    tp: int
    fn: int
    tn: int
    fp: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.tn, self.fp) < 0:
            raise ValueError("confusion counts must be non-negative")

    @classmethod
    def from_labels(cls, y_true, y_pred) -> "ConfusionCounts":
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        if t.shape != p.shape:
            raise ValueError("label vectors differ in length")
        return cls(int((t & p).sum()), int((t & ~p).sum()), int((~t & ~p).sum()), int((~t & p).sum()))

    @property
    def defined(self) -> bool:
        return self.tp + self.fn > 0 and self.tn + self.fp > 0

    @property
    def sensitivity(self) -> float:
        n = self.tp + self.fn
        return self.tp / n if n else 0.0

    @property
    def specificity(self) -> float:
        n = self.tn + self.fp
        return self.tn / n if n else 0.0


def gmean(counts: ConfusionCounts) -> float:
    """sqrt(sensitivity * specificity); 0 (with a warning) when a class is absent."""
    if not counts.defined:
        log.warning("geometric mean undefined for %s, reported as 0", counts)
        return 0.0
    return math.sqrt(counts.sensitivity * counts.specificity)


def geometric_total(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise UsageError("no values to aggregate")
    if np.any(v <= 0):
        return 0.0
    return float(np.exp(np.log(v).mean()))


@dataclass(frozen=True)
class Totals:
    baseline: float
    synthetic: float
    included: tuple[str, ...]
    zero_flag: bool  # some included patient scored 0, which zeroes a geometric total

    @property
    def difference(self) -> float:
        return self.synthetic - self.baseline


def aggregate(patients: Sequence[str], baseline: Sequence[float], synthetic: Sequence[float],
              exclusions: Sequence[str] = ()) -> Totals:
    """Geometric mean over included patients for each arm."""
    if not len(patients) == len(baseline) == len(synthetic):
        raise ValueError("patients, baseline and synthetic must have equal length")
    keep = [i for i, p in enumerate(patients) if p not in set(exclusions)]
    if not keep:
        raise UsageError("every patient is excluded")
    b = [baseline[i] for i in keep]
    s = [synthetic[i] for i in keep]
    zero = any(v <= 0 for v in b + s)
    if zero:
        log.warning("a patient with gmean 0 makes the geometric total 0")
    return Totals(geometric_total(b), geometric_total(s), tuple(patients[i] for i in keep), zero)


def exclusions_below(patients: Sequence[str], baseline: Sequence[float], synthetic: Sequence[float],
                     floor: float) -> list[str]:
    """Patients for whom both arms score below ``floor``."""
    return [p for p, b, s in zip(patients, baseline, synthetic) if b < floor and s < floor]
