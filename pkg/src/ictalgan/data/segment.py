"""Normalization and windowing of recordings."""

from __future__ import annotations

import logging
import math

import numpy as np

from .types import (
    ICTAL,
    INTERICTAL,
    SAMPLE_RATE,
    WINDOW_SECONDS,
    EegSample,
    Interval,
    PatientRecord,
    Recording,
)

log = logging.getLogger(__name__)

PURPOSES = ("gan-train", "detector-train", "test")
TRAIN_HOP_SECONDS = 1.0
GUARD_SECONDS = 60.0


def normalize(recording: Recording) -> tuple[Recording, float]:
    """Max-abs scale a recording into [-1, 1]; returns the scaled copy and the scale."""
    data = recording.data
    if not np.all(np.isfinite(data)):
        raise ValueError(f"recording {recording.recording_id!r} contains non-finite values")
    scale = float(np.max(np.abs(data))) if data.size else 0.0
    if scale == 0.0:
        scale = 1.0
    scaled = (data.astype(np.float64) / scale).astype(np.float32)
    return Recording(recording.recording_id, scaled, recording.sample_rate,
                     recording.channel_names, recording.intervals), scale


def denormalize(values: np.ndarray, scale: float) -> np.ndarray:
    return (np.asarray(values, dtype=np.float64) * scale).astype(np.float32)


def interictal_intervals(recording: Recording, guard: float = GUARD_SECONDS) -> list[Interval]:
    """Explicit inter-ictal intervals if labeled, else seizure-free time minus a guard band."""
    explicit = [iv for iv in recording.intervals if iv.label == INTERICTAL]
    if explicit:
        return explicit
    out = []
    cursor = 0.0
    for iv in recording.intervals:
        if iv.label != ICTAL:
            continue
        end = iv.start - guard
        if end > cursor:
            out.append(Interval(cursor, end, INTERICTAL))
        cursor = max(cursor, iv.end + guard)
    if recording.duration > cursor:
        out.append(Interval(cursor, recording.duration, INTERICTAL))
    return out


def window_starts(interval: Interval, hop: float, sample_rate: int = SAMPLE_RATE) -> list[int]:
    """Sample offsets of every window lying wholly inside ``interval``."""
    width = WINDOW_SECONDS * sample_rate
    step = int(round(hop * sample_rate))
    first = math.ceil(interval.start * sample_rate - 1e-9)
    last = math.floor(interval.end * sample_rate + 1e-9)
    if last - first < width:
        return []
    return list(range(first, last - width + 1, step))


def segment(record: PatientRecord, purpose: str, guard: float = GUARD_SECONDS) -> list[EegSample]:
    """Cut normalized 4 s windows of both classes from every recording of a patient.

    Training purposes use a 1 s hop (75 % overlap); ``test`` uses adjacent
    windows without overlap. Intervals shorter than one window are skipped.
    """
    if purpose not in PURPOSES:
        raise ValueError(f"purpose must be one of {PURPOSES}, got {purpose!r}")
    hop = float(WINDOW_SECONDS) if purpose == "test" else TRAIN_HOP_SECONDS
    out: list[EegSample] = []
    for rec in record.recordings:
        if rec.sample_rate != SAMPLE_RATE:
            raise ValueError(f"recording {rec.recording_id!r} is at {rec.sample_rate} Hz, "
                             f"expected {SAMPLE_RATE}")
        norm, scale = normalize(rec)
        ictal = [iv for iv in rec.intervals if iv.label == ICTAL]
        labeled = [(iv, ICTAL) for iv in ictal]
        labeled += [(iv, INTERICTAL) for iv in interictal_intervals(rec, guard)]
        width = WINDOW_SECONDS * rec.sample_rate
        for iv, label in labeled:
            starts = window_starts(iv, hop, rec.sample_rate)
            if not starts:
                log.warning("patient %s recording %s: %s interval [%.1f, %.1f] shorter than %d s, "
                            "skipped", record.patient_id, rec.recording_id, label, iv.start,
                            iv.end, WINDOW_SECONDS)
                continue
            for s in starts:
                out.append(EegSample(norm.data[:, s:s + width], label, record.patient_id,
                                     recording_id=rec.recording_id,
                                     window_start=s / rec.sample_rate,
                                     sample_rate=rec.sample_rate, scale=scale))
    return out
