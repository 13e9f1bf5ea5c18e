import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ictalgan.data.io import (
    dumps_dataset,
    ingest_csv,
    loads_dataset,
    read_dataset,
    read_samples,
    write_dataset,
    write_samples,
)
from ictalgan.data.pairing import (
    SkipPatient,
    build_eval_sets,
    cross_patient_ictal,
    lopo_split,
    pair,
)
from ictalgan.data.segment import denormalize, interictal_intervals, normalize, segment
from ictalgan.data.surrogate import SurrogateConfig, surrogate_generate
from ictalgan.data.types import (
    ICTAL,
    INTERICTAL,
    Dataset,
    EegSample,
    Interval,
    PatientRecord,
    Recording,
)
from ictalgan.errors import DimensionError, FormatError, UnsupportedVersionError, UsageError
from ictalgan.features.spectral import band_power


def _recording(seconds, intervals=(), value=None, seed=0, rid="R1"):
    n = int(seconds * 256)
    if value is None:
        data = np.random.default_rng(seed).standard_normal((2, n))
    else:
        data = np.full((2, n), value)
    return Recording(rid, data.astype(np.float32), intervals=tuple(intervals))


def _window(label, pid, start=0.0, rid="R1"):
    return EegSample(np.zeros((2, 1024), np.float32), label, pid, recording_id=rid,
                     window_start=start)


# -- types -------------------------------------------------------------------

def test_sample_shape_checked():
    with pytest.raises(DimensionError):
        EegSample(np.zeros((2, 1000)), ICTAL, "P")
    with pytest.raises(DimensionError):
        EegSample(np.zeros((3, 1024)), ICTAL, "P")
    with pytest.raises(ValueError):
        EegSample(np.zeros((2, 1024)), "seizure", "P")


def test_overlapping_intervals_rejected():
    with pytest.raises(FormatError):
        _recording(100, [Interval(10, 30), Interval(20, 40)])
    with pytest.raises(FormatError):
        _recording(100, [Interval(90, 110)])


# -- normalization, segmentation ----------------------------------------------------

def test_normalize_constant_and_round_trip():
    norm, scale = normalize(_recording(10, value=200.0))
    assert scale == 200.0 and np.all(norm.data == 1.0)
    rec = _recording(10, seed=1)
    norm, scale = normalize(rec)
    assert np.max(np.abs(norm.data)) == pytest.approx(1.0)
    np.testing.assert_allclose(denormalize(norm.data, scale), rec.data, atol=1e-6)


def test_normalize_all_zero_scale_one():
    assert normalize(_recording(10, value=0.0))[1] == 1.0


def _only(record_intervals, seconds, purpose, label):
    rec = PatientRecord("P", (_recording(seconds, record_intervals),))
    return [w for w in segment(rec, purpose) if w.label == label]


def test_window_counts():
    iv = [Interval(100.0, 120.0)]
    assert len(_only(iv, 300, "test", ICTAL)) == 5
    assert len(_only(iv, 300, "detector-train", ICTAL)) == 17
    assert len(_only(iv, 300, "gan-train", ICTAL)) == 17


def test_short_interval_skipped_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        assert _only([Interval(100.0, 103.0)], 300, "test", ICTAL) == []
    assert "shorter than 4 s" in caplog.text


def test_guard_band():
    rec = _recording(400, [Interval(100.0, 150.0)])
    assert interictal_intervals(rec) == [Interval(0.0, 40.0, INTERICTAL),
                                         Interval(210.0, 400.0, INTERICTAL)]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 500), st.floats(1, 60)), min_size=0, max_size=4),
       st.sampled_from(["gan-train", "detector-train", "test"]))
def test_windows_never_cross_a_class_boundary(raw, purpose):
    intervals, cursor = [], 0.0
    for gap, dur in raw:
        start = cursor + gap
        if start + dur > 900:
            break
        intervals.append(Interval(start, start + dur))
        cursor = start + dur
    rec = _recording(900, intervals)
    allowed = {ICTAL: [(iv.start, iv.end) for iv in rec.intervals],
               INTERICTAL: [(iv.start, iv.end) for iv in interictal_intervals(rec)]}
    for w in segment(PatientRecord("P", (rec,)), purpose):
        lo, hi = w.window_start, w.window_start + 4.0
        assert any(a - 1e-9 <= lo and hi <= b + 1e-9 for a, b in allowed[w.label])


# -- pairing -----------------------------------------------------------------------

def test_pair_reuses_scarce_inputs():
    wins = [_window(ICTAL, "A", i) for i in range(10)]
    wins += [_window(INTERICTAL, "A", 100 + i) for i in range(3)]
    pairs = pair(wins, seed=0)
    assert len(pairs) == 10
    assert {id(p.target) for p in pairs} == {id(w) for w in wins[:10]}
    assert len({id(p.input) for p in pairs}) <= 3


def test_pair_drops_patient_missing_a_class(caplog):
    wins = [_window(ICTAL, "A"), _window(INTERICTAL, "A", 10.0), _window(ICTAL, "B")]
    with caplog.at_level(logging.WARNING):
        pairs = pair(wins)
    assert len(pairs) == 1 and "B" in caplog.text


def test_pair_seeded():
    wins = [_window(ICTAL, "A", i) for i in range(5)] + [_window(INTERICTAL, "A", 50 + i)
                                                        for i in range(5)]
    a = [id(p.input) for p in pair(wins, seed=4)]
    assert a == [id(p.input) for p in pair(wins, seed=4)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("ABCD"), st.booleans()), max_size=40),
       st.integers(0, 2 ** 31))
def test_pairing_is_intra_patient(spec, seed):
    wins = [_window(ICTAL if ictal else INTERICTAL, pid, float(i)) for i, (pid, ictal) in
            enumerate(spec)]
    for p in pair(wins, seed=seed):
        assert p.input.patient_id == p.target.patient_id
        assert p.input.label == INTERICTAL and p.target.label == ICTAL


def test_lopo_split_hygiene(small_dataset):
    pairs, hold = lopo_split(small_dataset, "P01")
    assert pairs and all(p.target.patient_id != "P01" and p.input.patient_id != "P01"
                         for p in pairs)
    assert all(w.patient_id == "P01" for w in hold.windows + hold.ictal_test)
    assert {p.target.patient_id for p in pairs} == {"P02"}
    with pytest.raises(UsageError):
        lopo_split(small_dataset, "P99")


def test_eval_sets(small_dataset):
    _, hold = lopo_split(small_dataset, "P01")
    synth = [w.with_meta(origin="synthetic") for w in hold.ictal]
    cross = cross_patient_ictal(small_dataset, "P01")
    sets = build_eval_sets(hold.ictal_test, hold.interictal, synth, cross, seed=0, n_train=200)
    n_ict = len(hold.ictal_test)
    test_inter = [w for w in sets.test if w.label == INTERICTAL]
    assert len(sets.test) == 3 * n_ict and len(test_inter) == 2 * n_ict
    assert sets.target_train[200:] == sets.baseline_train[200:]
    assert all(w.origin == "synthetic" for w in sets.target_train[:200])
    assert all(w.patient_id != "P01" for w in sets.baseline_train[:200])
    train_ids = {id(w) for w in sets.target_train + sets.baseline_train}
    assert not any(id(w) in train_ids for w in sets.test)
    # no inter-ictal training window overlaps a test window
    for w in sets.target_train[200:]:
        assert all(abs(w.window_start - u.window_start) >= 4.0 for u in test_inter)
    starts = sorted(u.window_start for u in test_inter)
    assert all(b - a >= 4.0 for a, b in zip(starts, starts[1:]))
    again = build_eval_sets(hold.ictal_test, hold.interictal, synth, cross, seed=0, n_train=200)
    assert [id(w) for w in again.target_train] == [id(w) for w in sets.target_train]


def test_eval_sets_skip_without_ictal():
    with pytest.raises(SkipPatient):
        build_eval_sets([], [_window(INTERICTAL, "A")], [], [], seed=0)


# -- surrogate ------------------------------------------------------------------

def test_surrogate_deterministic_and_labeled(small_dataset):
    cfg = SurrogateConfig(seed=7, n_patients=2, recording_seconds=1800.0,
                          seizures_per_recording=(2, 2))
    again = surrogate_generate(cfg)
    assert again == small_dataset
    assert small_dataset.patient_ids == ["P01", "P02"]
    assert surrogate_generate(SurrogateConfig(seed=8, n_patients=2, recording_seconds=1800.0,
                                              seizures_per_recording=(2, 2))) != small_dataset
    for p in small_dataset.patients:
        for rec in p.recordings:
            assert rec.intervals and all(iv.label == ICTAL for iv in rec.intervals)


def test_surrogate_ictal_band_power(small_dataset):
    ratios = []
    for p in small_dataset.patients:
        wins = segment(p, "test")
        power = {lab: np.mean([sum(band_power(w.values[c], (0.5, 8.0))[0] for c in range(2))
                               for w in wins if w.label == lab]) for lab in (ICTAL, INTERICTAL)}
        ratios.append(power[ICTAL] / power[INTERICTAL])
    assert min(ratios) >= 3.0


def test_surrogate_boost_matches_intervals():
    cfg = SurrogateConfig(seed=3, n_patients=1, recording_seconds=600.0,
                          seizures_per_recording=(1, 2))
    rec = surrogate_generate(cfg).patients[0].recordings[0]
    rms = np.sqrt((rec.data.astype(np.float64) ** 2).mean(axis=0))
    sec = rms[: int(rec.duration) * 256].reshape(-1, 256).mean(axis=1)
    inside = np.zeros(len(sec), bool)
    for iv in rec.intervals:
        inside[int(iv.start) + 5:int(iv.end) - 5] = True
    outside = np.ones(len(sec), bool)
    for iv in rec.intervals:
        outside[max(0, int(iv.start) - 1):int(iv.end) + 1] = False
    assert sec[inside].mean() > 3 * sec[outside].mean()


# -- interchange files --------------------------------------------------------------

def test_dataset_round_trip(small_dataset, tmp_path):
    path = tmp_path / "d.eegd"
    write_dataset(small_dataset, path)
    back = read_dataset(path)
    assert back == small_dataset and back.metadata == small_dataset.metadata
    assert dumps_dataset(back) == path.read_bytes()


def test_corrupted_checksum(small_dataset):
    blob = bytearray(dumps_dataset(small_dataset))
    blob[100] ^= 0xFF
    with pytest.raises(FormatError, match="checksum"):
        loads_dataset(bytes(blob))


def test_truncated_and_bad_magic(small_dataset):
    blob = dumps_dataset(small_dataset)
    with pytest.raises(FormatError):
        loads_dataset(blob[: len(blob) // 2])
    with pytest.raises(FormatError):
        loads_dataset(b"XXXX" + blob[4:])


def test_version_mismatch(small_dataset):
    blob = dumps_dataset(small_dataset)
    with pytest.raises(UnsupportedVersionError):
        loads_dataset(blob[:4] + b"0002" + blob[8:])


def test_window_set_round_trip(tmp_path):
    wins = [EegSample(np.random.default_rng(i).uniform(-1, 1, (2, 1024)), ICTAL, "P03",
                      origin="synthetic", recording_id="R", window_start=float(i))
            for i in range(3)]
    write_samples(wins, tmp_path / "w.ictw", {"note": "x"})
    back, meta = read_samples(tmp_path / "w.ictw")
    assert meta["note"] == "x"
    for a, b in zip(wins, back):
        assert np.array_equal(a.values, b.values) and a.key == b.key


def _write_csv_recording(path, rate, seconds, seed=0):
    n = int(rate * seconds)
    rng = np.random.default_rng(seed)
    t = np.arange(n) / rate
    data = rng.standard_normal((2, n))
    lines = ["time,F7T3,F8T4"] + [f"{t[i]:.9f},{float(data[0, i])!r},{float(data[1, i])!r}" for i in range(n)]
    path.write_text("\n".join(lines) + "\n")
    return data


def test_ingest_csv(tmp_path):
    data = _write_csv_recording(tmp_path / "r1.csv", 256, 20)
    _write_csv_recording(tmp_path / "r2.csv", 512, 10, seed=1)
    (tmp_path / "iv.csv").write_text("start,end,label\n5,12,ictal\n")
    (tmp_path / "m.csv").write_text("patient_id,recording,intervals\n"
                                    "A,r1.csv,iv.csv\nA,r2.csv,\n")
    ds = ingest_csv(tmp_path / "m.csv")
    assert isinstance(ds, Dataset) and ds.patient_ids == ["A"]
    r1, r2 = ds.patient("A").recordings
    np.testing.assert_allclose(r1.data, data.astype(np.float32))
    assert r1.intervals == (Interval(5.0, 12.0, ICTAL),)
    assert r2.data.shape == (2, 2560) and r2.sample_rate == 256


def test_ingest_csv_bad_header(tmp_path):
    (tmp_path / "r.csv").write_text("t,a\n0,1\n1,2\n2,3\n")
    (tmp_path / "m.csv").write_text("patient_id,recording,intervals\nA,r.csv,\n")
    with pytest.raises(FormatError):
        ingest_csv(tmp_path / "m.csv")
