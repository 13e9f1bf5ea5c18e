import csv
import json

import pytest

from ictalgan.cli import (EXIT_FORMAT, EXIT_IO, EXIT_OK, EXIT_USAGE, PARAMS, main,
                          read_config_file, resolve)
from ictalgan.errors import ConfigError


def test_help_and_version_exit_zero(capsys):
    assert main(["--version"]) == EXIT_OK
    assert "ictalgan" in capsys.readouterr().out
    assert main(["verify", "--help"]) == EXIT_OK
    assert "p_tol" in capsys.readouterr().out


def test_no_command_is_usage_error():
    assert main([]) == EXIT_USAGE
    assert main(["bogus"]) == EXIT_USAGE


def test_verify_bundled_table(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("PASS") == 6 and "6/6 checks passed" in out
    snap = (tmp_path / "verify.config").read_text()
    assert "total_tol = 0.15" in snap and "seed = 0" in snap


def test_verify_tight_tolerance_fails(tmp_path):
    assert main(["verify", "--out", str(tmp_path), "--set", "p_tol=0"]) != EXIT_OK


def test_verify_missing_table_is_io_error(tmp_path):
    code = main(["verify", "--out", str(tmp_path), "--set", f"table={tmp_path / 'no.csv'}"])
    assert code == EXIT_IO


def test_unknown_and_bad_keys(tmp_path, capsys):
    assert main(["verify", "--out", str(tmp_path), "--set", "nope=1"]) == EXIT_USAGE
    assert "unknown config key" in capsys.readouterr().err
    assert main(["verify", "--out", str(tmp_path), "--set", "p_tol=abc"]) == EXIT_USAGE
    assert main(["verify", "--out", str(tmp_path), "--set", "p_tol"]) == EXIT_USAGE
    assert main(["train-gan", "--out", str(tmp_path)]) == EXIT_USAGE


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.config"
    cfg.write_text("# comment\nrepeats = 3\nn_trees = 7  # trailing\n")
    file_values = read_config_file(cfg)
    assert file_values == {"repeats": "3", "n_trees": "7"}
    base = {"dataset": "d", "synthetic": "s"}
    v = resolve("evaluate", {**file_values, **base}, {"ICTALGAN_N_TREES": "9"},
                {"repeats": "5"})
    assert v["repeats"] == 5 and v["n_trees"] == 9 and v["n_train"] == 2000
    with pytest.raises(ConfigError):
        resolve("evaluate", {"what": "1"}, {}, {})
    bad = tmp_path / "bad.config"
    bad.write_text("no equals sign\n")
    with pytest.raises(ConfigError):
        read_config_file(bad)


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("ICTALGAN_P_TOL", "0")
    assert main(["verify", "--out", str(tmp_path)]) != EXIT_OK
    assert "p_tol = 0.0" in (tmp_path / "verify.config").read_text()


def test_every_command_has_a_parser():
    for name in PARAMS:
        assert main([name, "--help"]) == EXIT_OK


def test_features_rejects_unknown_file(tmp_path):
    junk = tmp_path / "junk.bin"
    junk.write_bytes(b"XXXXnothing")
    assert main(["features", "--out", str(tmp_path), "--set", f"input={junk}"]) == EXIT_FORMAT


TINY = ["--set", "input_length=256", "--set", "width_scale=0.015625", "--set", "kernel=7"]


def test_small_pipeline(tmp_path, capsys):
    d = tmp_path
    assert main(["surrogate", "--out", str(d / "ds"), "--seed", "3",
                 "--set", "n_patients=2", "--set", "recording_seconds=1800",
                 "--set", "seizure_count_min=2", "--set", "seizure_count_max=2"]) == EXIT_OK
    ds = d / "ds" / "dataset.eegd"
    assert ds.exists()

    pools = []
    for pid in ("P01", "P02"):
        gdir = d / f"g_{pid}"
        assert main(["train-gan", "--out", str(gdir), "--set", f"dataset={ds}",
                     "--set", f"patient={pid}", "--set", "steps=3", "--set", "batch_size=4",
                     *TINY]) == EXIT_OK
        rows = list(csv.reader(open(gdir / "train_log.csv")))
        assert len(rows) == 4
        assert main(["generate", "--out", str(gdir), "--set", f"checkpoint={gdir / 'generator.ictg'}",
                     "--set", f"dataset={ds}", "--set", f"patient={pid}",
                     "--set", "count=30"]) == EXIT_OK
        pools.append(str(gdir / f"synthetic_{pid}.ictw"))

    assert main(["features", "--out", str(d / "f"), "--set", f"input={pools[0]}"]) == EXIT_OK
    rows = list(csv.reader(open(d / "f" / "features.csv")))
    assert len(rows) == 31 and len(rows[0]) == 5 + 108

    capsys.readouterr()
    assert main(["evaluate", "--out", str(d / "e"), "--set", f"dataset={ds}",
                 "--set", f"synthetic={','.join(pools)}", "--set", "repeats=1",
                 "--set", "n_train=20", "--set", "n_trees=4"]) == EXIT_OK
    assert "self-consistency check passed" in capsys.readouterr().out
    report = json.loads((d / "e" / "report.json").read_text())
    assert [r["patient_id"] for r in report["rows"]] == ["P01", "P02"]
    for name in ("report.csv", "histogram.csv", "histogram.svg", "evaluate.config"):
        assert (d / "e" / name).exists()


def test_generate_unknown_patient(tmp_path):
    assert main(["surrogate", "--out", str(tmp_path), "--set", "n_patients=1",
                 "--set", "recording_seconds=900", "--set", "seizure_count_min=1",
                 "--set", "seizure_count_max=1"]) == EXIT_OK
    assert main(["generate", "--out", str(tmp_path), "--set", "checkpoint=nothing",
                 "--set", f"dataset={tmp_path / 'dataset.eegd'}", "--set", "patient=P99"]
                ) == EXIT_USAGE
