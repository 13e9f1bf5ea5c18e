"""Pairing, leave-one-patient-out splits and detector evaluation sets."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import UsageError
from .segment import segment
from .types import ICTAL, INTERICTAL, WINDOW_SECONDS, Dataset, EegSample, PairedExample

log = logging.getLogger(__name__)

EVAL_TRAIN_SIZE = 2000


class SkipPatient(Exception):
    """The patient cannot be evaluated (e.g. no ictal test windows)."""


def pair(samples: Iterable[EegSample], seed: int = 0,
         patients: Sequence[str] | None = None) -> list[PairedExample]:
    """Give every ictal window one inter-ictal partner from the same patient.

    Partners are drawn uniformly with replacement. Patients missing either
    class are dropped with a warning.
    """
    by_patient: dict[str, dict[str, list[EegSample]]] = defaultdict(lambda: defaultdict(list))
    for s in samples:
        by_patient[s.patient_id][s.label].append(s)
    rng = np.random.default_rng(seed)
    wanted = sorted(by_patient) if patients is None else list(patients)
    out: list[PairedExample] = []
    for pid in wanted:
        groups = by_patient.get(pid, {})
        ictal, inter = groups.get(ICTAL, []), groups.get(INTERICTAL, [])
        if not ictal or not inter:
            log.warning("patient %s lacks %s windows, excluded from pairing", pid,
                        "ictal" if not ictal else "inter-ictal")
            continue
        picks = rng.integers(0, len(inter), size=len(ictal))
        out.extend(PairedExample(inter[j], target) for target, j in zip(ictal, picks))
    return out


@dataclass
class Holdout:
    patient_id: str
    interictal: list[EegSample]  # training-hop windows
    ictal_test: list[EegSample]  # non-overlapping windows
    ictal: list[EegSample]  # training-hop windows

    @property
    def windows(self) -> list[EegSample]:
        return self.interictal + self.ictal


def lopo_split(dataset: Dataset, target_patient: str, seed: int = 0
               ) -> tuple[list[PairedExample], Holdout]:
    """GAN training pairs from every patient except ``target_patient``, plus its holdout."""
    if target_patient not in dataset.patient_ids:
        raise UsageError(f"unknown patient id {target_patient!r}")
    others = [p for p in dataset.patients if p.patient_id != target_patient]
    windows = [w for p in others for w in segment(p, "gan-train")]
    pairs = pair(windows, seed=seed)
    target = dataset.patient(target_patient)
    train_hop = segment(target, "detector-train")
    test = segment(target, "test")
    holdout = Holdout(
        target_patient,
        interictal=[w for w in train_hop if w.label == INTERICTAL],
        ictal_test=[w for w in test if w.label == ICTAL],
        ictal=[w for w in train_hop if w.label == ICTAL],
    )
    return pairs, holdout


def cross_patient_ictal(dataset: Dataset, target_patient: str) -> list[EegSample]:
    return [w for p in dataset.patients if p.patient_id != target_patient
            for w in segment(p, "detector-train") if w.label == ICTAL]


@dataclass
class EvalSets:
    target_train: list[EegSample]
    baseline_train: list[EegSample]
    test: list[EegSample]


def _draw(pool: Sequence, n: int, rng: np.random.Generator, what: str) -> list:
    if not pool:
        raise SkipPatient(f"empty {what} pool")
    replace = len(pool) < n
    if replace:
        log.warning("%s pool has %d windows, sampling %d with replacement", what, len(pool), n)
    return [pool[i] for i in rng.choice(len(pool), size=n, replace=replace)]


def build_eval_sets(ictal_test: Sequence[EegSample], interictal: Sequence[EegSample],
                    synthetic_pool: Sequence[EegSample], cross_pool: Sequence[EegSample],
                    seed: int, n_train: int = EVAL_TRAIN_SIZE) -> EvalSets:
    """Training sets for both arms and the 1:2 test set of one target patient.

    The inter-ictal test windows do not overlap each other or any training
    window; both training sets share the same inter-ictal half.
    """
    if not ictal_test:
        raise SkipPatient("target patient has no ictal test windows")
    rng = np.random.default_rng(seed)
    n_test_inter = 2 * len(ictal_test)
    chosen: list[EegSample] = []
    by_rec: dict[tuple, list[float]] = defaultdict(list)
    for i in rng.permutation(len(interictal)):
        w = interictal[i]
        starts = by_rec[(w.patient_id, w.recording_id)]
        if all(abs(w.window_start - s) >= WINDOW_SECONDS for s in starts):
            chosen.append(w)
            starts.append(w.window_start)
            if len(chosen) == n_test_inter:
                break
    if len(chosen) < n_test_inter:
        log.warning("only %d non-overlapping inter-ictal test windows for %d ictal",
                    len(chosen), len(ictal_test))
    remaining = [w for w in interictal
                 if all(abs(w.window_start - s) >= WINDOW_SECONDS
                        for s in by_rec.get((w.patient_id, w.recording_id), ()))]
    train_inter = _draw(remaining, n_train, rng, "inter-ictal training")
    synthetic = _draw(synthetic_pool, n_train, rng, "synthetic ictal")
    cross = _draw(cross_pool, n_train, rng, "cross-patient ictal")
    test = list(ictal_test) + chosen
    return EvalSets(synthetic + train_inter, cross + train_inter, test)
