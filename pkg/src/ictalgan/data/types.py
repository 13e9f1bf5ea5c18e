from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from ..errors import DimensionError, FormatError

SAMPLE_RATE = 256
WINDOW_SECONDS = 4
CHANNELS = ("F7T3", "F8T4")
ICTAL = "ictal"
INTERICTAL = "interictal"
REAL = "real"
SYNTHETIC = "synthetic"


@dataclass(frozen=True, eq=False)
class EegSample:
    """One 4 s two-electrode window."""

    values: np.ndarray
    label: str
    patient_id: str
    origin: str = REAL
    recording_id: str = ""
    window_start: float = 0.0
    sample_rate: int = SAMPLE_RATE
    scale: float = 1.0  # divide-by factor applied during normalization

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32)
        if v.ndim != 2 or v.shape[0] != len(CHANNELS):
            raise DimensionError(f"sample must have shape (2, n), got {v.shape}")
        if v.shape[1] != self.sample_rate * WINDOW_SECONDS:
            raise DimensionError(
                f"sample has {v.shape[1]} points, expected {self.sample_rate * WINDOW_SECONDS}")
        if self.label not in (ICTAL, INTERICTAL):
            raise ValueError(f"unknown label {self.label!r}")
        if self.origin not in (REAL, SYNTHETIC):
            raise ValueError(f"unknown origin {self.origin!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def key(self) -> tuple:
        """Identity of a real window: where it was cut from."""
        return (self.patient_id, self.recording_id, self.window_start, self.label, self.origin)

    def with_meta(self, **changes) -> "EegSample":
        return replace(self, **changes)


@dataclass(frozen=True)
class PairedExample:
    input: EegSample
    target: EegSample

    def __post_init__(self):
        if self.input.label != INTERICTAL or self.target.label != ICTAL:
            raise ValueError("a pair maps an inter-ictal input to an ictal target")
        if self.input.patient_id != self.target.patient_id:
            raise ValueError("paired windows must come from the same patient")


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    label: str = ICTAL

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass(frozen=True, eq=False)
class Recording:
    recording_id: str
    data: np.ndarray  # (2, n) float32
    sample_rate: int = SAMPLE_RATE
    channel_names: tuple[str, ...] = CHANNELS
    intervals: tuple[Interval, ...] = ()

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float32)
        if d.ndim != 2 or d.shape[0] != len(self.channel_names):
            raise DimensionError(f"recording data must be (channels, n), got {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)
        object.__setattr__(self, "intervals", tuple(sorted(self.intervals, key=lambda i: i.start)))
        dur = self.duration
        prev_end = -np.inf
        for iv in self.intervals:
            if iv.start < 0 or iv.end > dur + 1e-9 or iv.end <= iv.start:
                raise FormatError(f"interval {iv} outside recording {self.recording_id!r} [0, {dur}]")
            if iv.start < prev_end:
                raise FormatError(f"overlapping intervals in recording {self.recording_id!r}")
            prev_end = iv.end

    @property
    def duration(self) -> float:
        return self.data.shape[1] / self.sample_rate

    def __eq__(self, other) -> bool:
        return (isinstance(other, Recording) and self.recording_id == other.recording_id
                and self.sample_rate == other.sample_rate
                and self.channel_names == other.channel_names
                and self.intervals == other.intervals
                and self.data.dtype == other.data.dtype
                and np.array_equal(self.data, other.data))


@dataclass(frozen=True)
class PatientRecord:
    patient_id: str
    recordings: tuple[Recording, ...]


@dataclass(frozen=True)
class Dataset:
    patients: tuple[PatientRecord, ...]
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def patient(self, patient_id: str) -> PatientRecord:
        for p in self.patients:
            if p.patient_id == patient_id:
                return p
        raise KeyError(f"unknown patient id {patient_id!r}")

    @property
    def patient_ids(self) -> list[str]:
        return [p.patient_id for p in self.patients]
