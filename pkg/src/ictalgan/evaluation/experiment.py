"""The repeated target-vs-baseline detector experiment over all patients."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from ..data.pairing import (
    EVAL_TRAIN_SIZE,
    SkipPatient,
    build_eval_sets,
    cross_patient_ictal,
    lopo_split,
)
from ..data.segment import segment
from ..data.types import ICTAL, INTERICTAL, Dataset, EegSample
from ..errors import IctalGanError
from ..features.extract import extract_features
from ..gan.config import ArchitectureConfig, GanTrainConfig
from ..gan.model import Generator
from ..gan.synth import synthesize_set
from ..gan.train import train
from .forest import RandomForest
from .metrics import ConfusionCounts, aggregate, exclusions_below, gmean
from .report import ExperimentReport, PatientResult, histogram
from .wilcoxon import wilcoxon_signed_rank

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    repeats: int = 15
    n_train: int = EVAL_TRAIN_SIZE
    n_trees: int = 100
    exclusion_floor: float = 0.30
    subband: str = "coefficients"
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _features_of(samples: Sequence[EegSample], subband: str, jobs: int) -> np.ndarray:
    if not samples:
        return np.zeros((0, 0))
    if jobs <= 1 or len(samples) < 64:
        return np.stack([extract_features(s, subband) for s in samples])
    chunk = math.ceil(len(samples) / (4 * jobs))
    parts = [samples[i:i + chunk] for i in range(0, len(samples), chunk)]
    with ProcessPoolExecutor(jobs) as ex:
        rows = list(ex.map(_feature_chunk, parts, [subband] * len(parts)))
    return np.concatenate(rows)


def _feature_chunk(samples, subband):
    return np.stack([extract_features(s, subband) for s in samples])


class FeatureCache:
    """Feature rows keyed by object identity; the cache keeps its samples alive."""

    def __init__(self, subband: str = "coefficients", jobs: int = 1):
        self.subband = subband
        self.jobs = jobs
        self._rows: dict[int, np.ndarray] = {}
        self._keep: list[EegSample] = []

    def add(self, samples: Sequence[EegSample]) -> None:
        todo = [s for s in samples if id(s) not in self._rows]
        if not todo:
            return
        for s, row in zip(todo, _features_of(todo, self.subband, self.jobs)):
            self._rows[id(s)] = row
            self._keep.append(s)

    def matrix(self, samples: Sequence[EegSample]) -> np.ndarray:
        return np.stack([self._rows[id(s)] for s in samples])


def _labels(samples: Sequence[EegSample]) -> np.ndarray:
    return np.array([1 if s.label == ICTAL else 0 for s in samples], dtype=np.int64)


def repeat_seed(seed: int, patient_index: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, patient_index, repeat]).generate_state(1)[0])


def _run_patient(pid: str, patient_index: int, train_sets, test_X, test_y, cfg: ExperimentConfig
                 ) -> PatientResult:
    base_runs, synth_runs = [], []
    for r, (target_X, target_y, base_X, base_y) in enumerate(train_sets):
        seed = repeat_seed(cfg.seed, patient_index, r)
        scores = []
        for X, y in ((base_X, base_y), (target_X, target_y)):
            forest = RandomForest(n_trees=cfg.n_trees, seed=seed).fit(X, y)
            counts = ConfusionCounts.from_labels(test_y[r], forest.predict(test_X[r]))
            scores.append(gmean(counts))
        base_runs.append(scores[0])
        synth_runs.append(scores[1])
        log.info("patient %s repeat %d: baseline %.4f synthetic %.4f", pid, r, *scores)
    return PatientResult(pid, float(np.mean(base_runs)), float(np.mean(synth_runs)),
                         float(np.std(base_runs)), float(np.std(synth_runs)), len(base_runs),
                         base_runs, synth_runs)


def run_experiment(dataset: Dataset, synthetic_pools: Mapping[str, Sequence[EegSample]],
                   config: ExperimentConfig = ExperimentConfig(), jobs: int = 1) -> ExperimentReport:
    """Per patient and repeat: build both training sets, fit a forest on each, score the test set.

    ``synthetic_pools`` maps each target patient to synthetic ictal windows made
    by a generator that never saw that patient. Patients without a pool or
    without ictal test windows are skipped and listed in the report.
    """
    cache = FeatureCache(config.subband, jobs)
    skipped: dict[str, str] = {}
    jobs_in = []
    for index, pid in enumerate(dataset.patient_ids):
        pool = list(synthetic_pools.get(pid, ()))
        if not pool:
            skipped[pid] = "no synthetic pool"
            continue
        target = dataset.patient(pid)
        train_hop = segment(target, "detector-train")
        interictal = [w for w in train_hop if w.label == INTERICTAL]
        ictal_test = [w for w in segment(target, "test") if w.label == ICTAL]
        cross = cross_patient_ictal(dataset, pid)
        sets = []
        try:
            for r in range(config.repeats):
                sets.append(build_eval_sets(ictal_test, interictal, pool, cross,
                                            repeat_seed(config.seed, index, r), config.n_train))
        except SkipPatient as e:
            skipped[pid] = str(e)
            log.warning("patient %s skipped: %s", pid, e)
            continue
        for s in sets:
            cache.add(s.target_train)
            cache.add(s.baseline_train)
            cache.add(s.test)
        arrays = [(cache.matrix(s.target_train), _labels(s.target_train),
                   cache.matrix(s.baseline_train), _labels(s.baseline_train)) for s in sets]
        test_X = [cache.matrix(s.test) for s in sets]
        test_y = [_labels(s.test) for s in sets]
        jobs_in.append((pid, index, arrays, test_X, test_y, config))
    if jobs > 1 and len(jobs_in) > 1:
        with ProcessPoolExecutor(min(jobs, len(jobs_in))) as ex:
            rows = list(ex.map(_run_patient, *zip(*jobs_in)))
    else:
        rows = [_run_patient(*args) for args in jobs_in]
    if not rows:
        raise IctalGanError(f"no patient could be evaluated: {skipped}")
    return assemble_report(rows, skipped, config)


def assemble_report(rows: list[PatientResult], skipped: dict[str, str],
                    config: ExperimentConfig) -> ExperimentReport:
    ids = [r.patient_id for r in rows]
    base = [r.baseline for r in rows]
    synth = [r.synthetic for r in rows]
    excluded = exclusions_below(ids, base, synth, config.exclusion_floor)
    if len(excluded) == len(rows):
        log.warning("every patient fell below the exclusion floor; totals use all of them")
        excluded = []
    totals = aggregate(ids, base, synth, excluded)
    diffs = [100.0 * r.difference for r in rows if r.patient_id not in excluded]
    test = wilcoxon_signed_rank(diffs)
    return ExperimentReport(rows, excluded, skipped, totals.baseline, totals.synthetic,
                            test.statistic, test.p_value, test.method, histogram(diffs, 1.0),
                            config.to_dict())


def train_lopo_generator(dataset: Dataset, target: str, train_cfg: GanTrainConfig,
                         arch: ArchitectureConfig, log_path=None, checkpoint_path=None) -> Generator:
    pairs, _ = lopo_split(dataset, target, seed=train_cfg.seed)
    return train(pairs, train_cfg, arch, log_path, checkpoint_path).generator


def synthetic_pool_for(dataset: Dataset, target: str, generator: Generator, count: int,
                       seed: int = 0) -> list[EegSample]:
    """Synthetic ictal windows made from the target's inter-ictal windows."""
    interictal = [w for w in segment(dataset.patient(target), "detector-train")
                  if w.label == INTERICTAL]
    return synthesize_set(generator, interictal, count, seed=seed)
