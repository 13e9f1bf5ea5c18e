"""Interchange files: "EEGD0001" datasets, window sets and CSV ingestion.

EEGD0001 layout (all integers little-endian)::

    8 bytes   magic b"EEGD" + version b"0001"
    u32       patient count
    str       provenance metadata as JSON
    per patient:
        str   patient id
        u32   recording count
        per recording:
            str      recording id
            u32      sample rate
            u16      channel count, then one str per channel name
            u64      samples per channel
            f32[]    channel-major samples
            u32      interval count, then per interval: f64 start, f64 end, str label
    u32       CRC-32 of every preceding byte

A ``str`` is a u32 byte length followed by UTF-8 bytes.
"""

from __future__ import annotations

import csv
import io
import json
import struct
import zlib
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import resample_poly

from ..errors import FormatError, UnsupportedVersionError
from ..tensor import checkpoint as ckpt
from .types import (
    CHANNELS,
    ICTAL,
    INTERICTAL,
    SAMPLE_RATE,
    Dataset,
    EegSample,
    Interval,
    PatientRecord,
    Recording,
)

MAGIC = b"EEGD"
VERSION = b"0001"


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def pack(self, fmt: str, *values) -> None:
        self.buf.write(struct.pack("<" + fmt, *values))

    def text(self, s: str) -> None:
        raw = s.encode("utf-8")
        self.pack("I", len(raw))
        self.buf.write(raw)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise FormatError("dataset payload truncated")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        fmt = "<" + fmt
        vals = struct.unpack(fmt, self.take(struct.calcsize(fmt)))
        return vals[0] if len(vals) == 1 else vals

    def text(self) -> str:
        try:
            return self.take(self.unpack("I")).decode("utf-8")
        except UnicodeDecodeError as e:
            raise FormatError(f"invalid string in dataset: {e}") from None


def dumps_dataset(dataset: Dataset) -> bytes:
    w = _Writer()
    w.buf.write(MAGIC + VERSION)
    w.pack("I", len(dataset.patients))
    w.text(json.dumps(dataset.metadata, sort_keys=True))
    for p in dataset.patients:
        w.text(p.patient_id)
        w.pack("I", len(p.recordings))
        for rec in p.recordings:
            w.text(rec.recording_id)
            w.pack("I", rec.sample_rate)
            w.pack("H", len(rec.channel_names))
            for name in rec.channel_names:
                w.text(name)
            w.pack("Q", rec.data.shape[1])
            w.buf.write(np.ascontiguousarray(rec.data, dtype="<f4").tobytes())
            w.pack("I", len(rec.intervals))
            for iv in rec.intervals:
                w.pack("dd", iv.start, iv.end)
                w.text(iv.label)
    body = w.buf.getvalue()
    return body + struct.pack("<I", zlib.crc32(body))


def loads_dataset(blob: bytes) -> Dataset:
    if len(blob) < 12:
        raise FormatError("dataset file truncated before header")
    if blob[:4] != MAGIC:
        raise FormatError(f"bad magic {blob[:4]!r}, not an EEGD dataset")
    if blob[4:8] != VERSION:
        raise UnsupportedVersionError(
            f"dataset version {blob[4:8].decode(errors='replace')!r} unsupported "
            f"(expected {VERSION.decode()})")
    body, stored = blob[:-4], struct.unpack("<I", blob[-4:])[0]
    if zlib.crc32(body) != stored:
        raise FormatError("dataset checksum mismatch (corrupted or truncated file)")
    r = _Reader(body)
    r.take(8)
    n_patients = r.unpack("I")
    try:
        metadata = json.loads(r.text())
    except json.JSONDecodeError as e:
        raise FormatError(f"bad dataset metadata: {e}") from None
    patients = []
    for _ in range(n_patients):
        pid = r.text()
        recordings = []
        for _ in range(r.unpack("I")):
            rid = r.text()
            rate = r.unpack("I")
            names = tuple(r.text() for _ in range(r.unpack("H")))
            n = r.unpack("Q")
            data = np.frombuffer(r.take(4 * n * len(names)), dtype="<f4").reshape(len(names), n)
            intervals = []
            for _ in range(r.unpack("I")):
                start, end = r.unpack("dd")
                intervals.append(Interval(start, end, r.text()))
            recordings.append(Recording(rid, data.astype(np.float32), rate, names, tuple(intervals)))
        patients.append(PatientRecord(pid, tuple(recordings)))
    if r.pos != len(body):
        raise FormatError(f"{len(body) - r.pos} unexpected trailing bytes in dataset")
    return Dataset(tuple(patients), metadata)


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    Path(path).write_bytes(dumps_dataset(dataset))


def read_dataset(path: str | Path) -> Dataset:
    return loads_dataset(Path(path).read_bytes())


# window sets reuse the named-tensor container
_SAMPLE_FIELDS = ("label", "patient_id", "origin", "recording_id", "window_start", "sample_rate",
                  "scale")


def write_samples(samples: Sequence[EegSample], path: str | Path, metadata: dict | None = None) -> None:
    values = (np.stack([s.values for s in samples]) if samples
              else np.zeros((0, len(CHANNELS), SAMPLE_RATE * 4), np.float32))
    rows = [{f: getattr(s, f) for f in _SAMPLE_FIELDS} for s in samples]
    ckpt.save(path, {"values": values}, {"kind": "samples", "samples": rows, **(metadata or {})})


def read_samples(path: str | Path) -> tuple[list[EegSample], dict]:
    arrays, meta = ckpt.load(path)
    if meta.get("kind") != "samples" or "values" not in arrays:
        raise FormatError(f"{path} is not a window-set file")
    rows = meta.pop("samples")
    values = arrays["values"]
    if len(rows) != len(values):
        raise FormatError("window-set metadata and payload disagree")
    return [EegSample(v, **row) for v, row in zip(values, rows)], meta


def _read_recording_csv(path: Path) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError:
        raise
    if len(rows) < 3:
        raise FormatError(f"{path}: need a header and at least two samples")
    header = [h.strip() for h in rows[0]]
    if len(header) != 3 or header[0].lower() != "time":
        raise FormatError(f"{path}: expected columns time,<ch1>,<ch2>, got {header}")
    try:
        table = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=np.float64)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from None
    if table.shape[1] != 3:
        raise FormatError(f"{path}: ragged rows")
    return table[:, 0], table[:, 1:].T, tuple(header[1:])


def _read_intervals_csv(path: Path) -> list[Interval]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                label = row["label"].strip().lower().replace("-", "")
                if label not in (ICTAL, INTERICTAL):
                    raise FormatError(f"{path}: unknown interval label {row['label']!r}")
                out.append(Interval(float(row["start"]), float(row["end"]), label))
            except (KeyError, TypeError, ValueError) as e:
                raise FormatError(f"{path}: bad interval row {row}: {e}") from None
    return out


def ingest_csv(manifest: str | Path) -> Dataset:
    """Build a dataset from a manifest CSV with columns patient_id, recording, intervals.

    ``recording`` names a CSV with columns time, ch1, ch2 (microvolts, uniform
    sampling); ``intervals`` names a CSV with columns start, end, label
    (seconds). Paths are relative to the manifest. Recordings at another rate
    are resampled to 256 Hz.
    """
    manifest = Path(manifest)
    base = manifest.parent
    by_patient: dict[str, list[Recording]] = {}
    with open(manifest, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"patient_id", "recording", "intervals"} - set(reader.fieldnames or ())
        if missing:
            raise FormatError(f"{manifest}: missing columns {sorted(missing)}")
        entries = list(reader)
    for row in entries:
        rec_path = base / row["recording"]
        t, data, names = _read_recording_csv(rec_path)
        steps = np.diff(t)
        if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-6, atol=1e-9):
            raise FormatError(f"{rec_path}: time column must be uniformly increasing")
        rate = Fraction(1.0 / steps[0]).limit_denominator(1000)
        if rate != SAMPLE_RATE:
            ratio = Fraction(SAMPLE_RATE) / rate
            data = resample_poly(data, ratio.numerator, ratio.denominator, axis=1)
        intervals = _read_intervals_csv(base / row["intervals"]) if row["intervals"] else []
        rid = Path(row["recording"]).stem
        by_patient.setdefault(row["patient_id"], []).append(
            Recording(rid, data.astype(np.float32), SAMPLE_RATE, names, tuple(intervals)))
    patients = tuple(PatientRecord(pid, tuple(recs)) for pid, recs in by_patient.items())
    return Dataset(patients, {"source": "csv", "manifest": str(manifest)})
