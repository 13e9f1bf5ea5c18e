"""Synthetic two-channel EEG with labeled seizures, for desk-scale experiments.

Background is 1/f^beta noise, a 10 Hz alpha rhythm and a weak persistent
rhythm at the patient's delta-theta frequency. A seizure boosts that same
rhythm under a smooth envelope that is exactly zero outside the labeled
interval. The rhythm runs at a whole number of hertz in absolute time and
seizures start on whole seconds, so every window cut on the 1 s grid sees it
at the same phase: the ictal waveform of a patient is predictable from the
patient's inter-ictal activity, up to envelope and background noise.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .types import ICTAL, SAMPLE_RATE, Dataset, Interval, PatientRecord, Recording


@dataclass(frozen=True)
class SurrogateConfig:
    seed: int = 0
    n_patients: int = 4
    recordings_per_patient: int = 1
    recording_seconds: float = 3600.0
    seizures_per_recording: tuple[int, int] = (3, 5)
    seizure_seconds: tuple[float, float] = (30.0, 90.0)
    ictal_freq_hz: tuple[float, float] = (0.5, 7.0)
    burst_gain: tuple[float, float] = (4.0, 6.0)
    background_exponent: tuple[float, float] = (1.0, 2.0)
    background_uv: float = 20.0
    alpha_ratio: float = 0.5
    rhythm_ratio: float = 0.3  # inter-ictal amplitude of the patient rhythm, relative to background
    min_gap_seconds: float = 150.0

    def __post_init__(self):
        lo, hi = self.ictal_freq_hz
        if not 0.5 <= lo <= hi <= 7.0:
            raise ValueError("ictal frequencies must lie in the 0.5-7 Hz delta-theta range")
        if math.ceil(lo) > hi:
            raise ValueError("the ictal frequency range must contain a whole number of hertz")
        if self.n_patients < 1 or self.recordings_per_patient < 1:
            raise ValueError("need at least one patient and one recording")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PatientTraits:
    ictal_freq: float
    burst_gain: float
    exponent: float


def pink_noise(n: int, exponent: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance noise with power spectrum proportional to 1/f^exponent."""
    spec = np.fft.rfft(rng.standard_normal(n))
    f = np.fft.rfftfreq(n, d=1.0 / SAMPLE_RATE)
    f[0] = f[1]
    spec *= f ** (-exponent / 2.0)
    x = np.fft.irfft(spec, n)
    x -= x.mean()
    return x / x.std()


def _place_seizures(cfg: SurrogateConfig, rng: np.random.Generator) -> list[Interval]:
    lo, hi = cfg.seizures_per_recording
    count = int(rng.integers(lo, hi + 1))
    durations = rng.uniform(*cfg.seizure_seconds, size=count)
    # slots of equal width keep seizures apart by at least min_gap_seconds
    slot = cfg.recording_seconds / count
    out = []
    for k, dur in enumerate(durations):
        room = slot - dur - cfg.min_gap_seconds
        if room <= 0:
            raise ValueError("recording too short for the requested seizures")
        start = float(math.floor(k * slot + cfg.min_gap_seconds / 2 + rng.uniform(0, room)))
        end = round((start + dur) * SAMPLE_RATE) / SAMPLE_RATE
        out.append(Interval(start, end, ICTAL))
    return out


def seizure_envelope(n: int, rng: np.random.Generator) -> np.ndarray:
    """Raised-cosine ramps with slow amplitude modulation; zero at both ends."""
    t = np.arange(n) / SAMPLE_RATE
    ramp = min(n // 4, 3 * SAMPLE_RATE)
    env = np.ones(n)
    r = 0.5 - 0.5 * np.cos(np.pi * np.arange(ramp) / ramp)
    env[:ramp] = r
    env[n - ramp:] = r[::-1]
    env[0] = env[-1] = 0.0
    mod = 1.0 + 0.25 * np.sin(2 * np.pi * rng.uniform(0.05, 0.2) * t + rng.uniform(0, 2 * np.pi))
    return env * mod


def patient_traits(cfg: SurrogateConfig, rng: np.random.Generator) -> PatientTraits:
    lo, hi = cfg.ictal_freq_hz
    freq = float(rng.integers(math.ceil(lo), math.floor(hi) + 1))
    return PatientTraits(freq, float(rng.uniform(*cfg.burst_gain)),
                         float(rng.uniform(*cfg.background_exponent)))


def recording_components(cfg: SurrogateConfig, traits: PatientTraits, rng: np.random.Generator
                         ) -> tuple[np.ndarray, np.ndarray, list[Interval]]:
    """Background and ictal components (each (2, n), in microvolts) and seizure intervals."""
    n = int(round(cfg.recording_seconds * SAMPLE_RATE))
    t = np.arange(n) / SAMPLE_RATE
    background = np.empty((2, n))
    alpha_phase = rng.uniform(0, 2 * np.pi)
    alpha_mod = 1.0 + 0.5 * np.sin(2 * np.pi * 0.03 * t + rng.uniform(0, 2 * np.pi))
    channel_gain = (1.0, rng.uniform(0.6, 1.0))
    rhythm = np.sqrt(2) * np.sin(2 * np.pi * traits.ictal_freq * t)
    for ch in range(2):
        alpha = cfg.alpha_ratio * np.sqrt(2) * alpha_mod * np.sin(
            2 * np.pi * 10.0 * t + alpha_phase + 0.3 * ch)
        slow = cfg.rhythm_ratio * channel_gain[ch] * rhythm
        background[ch] = cfg.background_uv * (pink_noise(n, traits.exponent, rng) + alpha + slow)
    ictal = np.zeros((2, n))
    intervals = _place_seizures(cfg, rng)
    for iv in intervals:
        a = int(round(iv.start * SAMPLE_RATE))
        b = int(round(iv.end * SAMPLE_RATE))
        env = seizure_envelope(b - a, rng)
        amp = traits.burst_gain * cfg.background_uv
        for ch in range(2):
            ictal[ch, a:b] = amp * channel_gain[ch] * env * rhythm[a:b]
    return background, ictal, intervals


def surrogate_generate(cfg: SurrogateConfig = SurrogateConfig()) -> Dataset:
    patients = []
    traits_meta = {}
    for i, seq in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.n_patients)):
        rng = np.random.default_rng(seq)
        pid = f"P{i + 1:02d}"
        traits = patient_traits(cfg, rng)
        traits_meta[pid] = asdict(traits)
        recordings = []
        for r in range(cfg.recordings_per_patient):
            background, ictal, intervals = recording_components(cfg, traits, rng)
            recordings.append(Recording(f"{pid}-R{r + 1}", (background + ictal).astype(np.float32),
                                        intervals=tuple(intervals)))
        patients.append(PatientRecord(pid, tuple(recordings)))
    # round-trip through JSON so metadata compares equal after a file round trip
    meta = json.loads(json.dumps({"source": "surrogate", "config": cfg.to_dict(),
                                  "traits": traits_meta}))
    return Dataset(tuple(patients), meta)
