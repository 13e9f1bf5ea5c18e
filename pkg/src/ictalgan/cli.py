"""Command-line entry point: ``ictalgan <command> [options]``.

Every command reads parameters from (lowest to highest precedence) built-in
defaults, a ``key = value`` config file given by ``--config``, environment
variables ``ICTALGAN_<KEY>``, and ``--set key=value`` / ``--seed`` on the
command line. Unknown keys are rejected. The resolved parameters are written
to ``<out>/<command>.config`` so a run can be repeated exactly.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .errors import ConfigError, FormatError, IctalGanError, UsageError

log = logging.getLogger("ictalgan")

ENV_PREFIX = "ICTALGAN_"
EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_FORMAT, EXIT_NUMERICAL = 0, 2, 3, 4, 5
REQUIRED = object()


@dataclass(frozen=True)
class Param:
    kind: type
    default: Any = REQUIRED
    help: str = ""


COMMON = {"seed": Param(int, 0, "master seed")}

ARCH_PARAMS = {
    "input_length": Param(int, 2048, "flattened generator input length"),
    "width_scale": Param(float, 1.0, "channel multiplier for desk-scale runs"),
    "kernel": Param(int, 31, "convolution kernel length (odd)"),
    "leaky_slope": Param(float, 0.2),
    "skip_mode": Param(str, "scalar", "scalar or channel"),
}

PARAMS: dict[str, dict[str, Param]] = {
    "surrogate": {
        "n_patients": Param(int, 4),
        "recordings_per_patient": Param(int, 1),
        "recording_seconds": Param(float, 3600.0),
        "seizure_count_min": Param(int, 3),
        "seizure_count_max": Param(int, 5),
        "seizure_seconds_min": Param(float, 30.0),
        "seizure_seconds_max": Param(float, 90.0),
        "rhythm_ratio": Param(float, 0.3),
    },
    "ingest": {
        "manifest": Param(str, REQUIRED, "CSV manifest: patient_id, recording, intervals"),
    },
    "train-gan": {
        "dataset": Param(str, REQUIRED),
        "patient": Param(str, REQUIRED, "target patient left out of training"),
        **ARCH_PARAMS,
        "lam": Param(float, 100.0),
        "lr_g": Param(float, 1e-4),
        "lr_d": Param(float, 4e-4),
        "beta1": Param(float, 0.0),
        "beta2": Param(float, 0.9),
        "batch_size": Param(int, 100),
        "steps": Param(int, 1000),
        "checkpoint_every": Param(int, 0),
        "sn_iters": Param(int, 1),
        "resume": Param(str, "", "checkpoint to continue from"),
    },
    "generate": {
        "checkpoint": Param(str, REQUIRED),
        "dataset": Param(str, REQUIRED),
        "patient": Param(str, REQUIRED, "patient whose inter-ictal windows are translated"),
        "count": Param(int, 2000),
    },
    "features": {
        "input": Param(str, REQUIRED, "dataset (EEGD) or window-set file"),
        "purpose": Param(str, "detector-train", "segmentation for datasets"),
        "subband": Param(str, "coefficients", "coefficients or reconstructed"),
    },
    "evaluate": {
        "dataset": Param(str, REQUIRED),
        "synthetic": Param(str, REQUIRED, "comma-separated window-set files, one per patient"),
        "repeats": Param(int, 15),
        "n_train": Param(int, 2000),
        "n_trees": Param(int, 100),
        "exclusion_floor": Param(float, 0.30),
        "subband": Param(str, "coefficients"),
    },
    "verify": {
        "table": Param(str, "", "results table CSV; the bundled one when empty"),
        "total_tol": Param(float, 0.15),
        "diff_tol": Param(float, 0.1),
        "p_tol": Param(float, 0.003),
    },
}


def _convert(key: str, raw: str, kind: type) -> Any:
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return low in ("1", "true", "yes")
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {key!r} (expected {kind.__name__})") from None


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def resolve(command: str, file_values: dict[str, str], env: dict[str, str],
            overrides: dict[str, str]) -> dict[str, Any]:
    spec = {**COMMON, **PARAMS[command]}
    for source in (file_values, overrides):
        unknown = sorted(set(source) - set(spec))
        if unknown:
            raise ConfigError(f"unknown config key(s) for {command}: {', '.join(unknown)}")
    values: dict[str, Any] = {}
    for key, p in spec.items():
        raw = overrides.get(key, env.get(ENV_PREFIX + key.upper(), file_values.get(key)))
        if raw is None:
            if p.default is REQUIRED:
                raise ConfigError(f"missing required key {key!r} for {command}")
            values[key] = p.default
        else:
            values[key] = _convert(key, raw, p.kind)
    return values


def write_snapshot(out: Path, command: str, values: dict[str, Any]) -> Path:
    path = out / f"{command}.config"
    lines = [f"# resolved parameters for 'ictalgan {command}' (ictalgan {__version__})"]
    lines += [f"{k} = {values[k]}" for k in sorted(values)]
    path.write_text("\n".join(lines) + "\n")
    return path


def _arch(v: dict):
    from .gan.config import ArchitectureConfig

    return ArchitectureConfig(input_length=v["input_length"], width_scale=v["width_scale"],
                              kernel=v["kernel"], leaky_slope=v["leaky_slope"],
                              skip_mode=v["skip_mode"])


def cmd_surrogate(v: dict, out: Path, jobs: int) -> int:
    from .data.io import write_dataset
    from .data.surrogate import SurrogateConfig, surrogate_generate

    try:
        cfg = SurrogateConfig(
            seed=v["seed"], n_patients=v["n_patients"],
            recordings_per_patient=v["recordings_per_patient"],
            recording_seconds=v["recording_seconds"],
            seizures_per_recording=(v["seizure_count_min"], v["seizure_count_max"]),
            seizure_seconds=(v["seizure_seconds_min"], v["seizure_seconds_max"]),
            rhythm_ratio=v["rhythm_ratio"])
        ds = surrogate_generate(cfg)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    path = out / "dataset.eegd"
    write_dataset(ds, path)
    print(f"wrote {path} ({len(ds.patients)} patients)")
    return EXIT_OK


def cmd_ingest(v: dict, out: Path, jobs: int) -> int:
    from .data.io import ingest_csv, write_dataset

    ds = ingest_csv(v["manifest"])
    path = out / "dataset.eegd"
    write_dataset(ds, path)
    print(f"wrote {path} ({len(ds.patients)} patients)")
    return EXIT_OK


def cmd_train_gan(v: dict, out: Path, jobs: int) -> int:
    from .data.io import read_dataset
    from .data.pairing import lopo_split
    from .gan.config import GanTrainConfig
    from .gan.train import load_checkpoint, train

    ds = read_dataset(v["dataset"])
    cfg = GanTrainConfig(lam=v["lam"], beta1=v["beta1"], beta2=v["beta2"], lr_g=v["lr_g"],
                         lr_d=v["lr_d"], batch_size=v["batch_size"], steps=v["steps"],
                         seed=v["seed"], checkpoint_every=v["checkpoint_every"],
                         sn_iters=v["sn_iters"])
    state = None
    if v["resume"]:
        state, meta = load_checkpoint(v["resume"])
        arch = state.generator.arch
        print(f"resuming from step {state.step}")
    else:
        arch = _arch(v)
    pairs, _ = lopo_split(ds, v["patient"], seed=v["seed"])
    log_path = out / "train_log.csv"
    if state is None and log_path.exists():
        log_path.unlink()
    ckpt_path = out / "generator.ictg"
    state = train(pairs, cfg, arch, log_path=log_path, checkpoint_path=ckpt_path, state=state)
    last = state.log[-1] if state.log else None
    print(f"trained to step {state.step}; checkpoint {ckpt_path}; log {log_path}")
    if last is not None:
        print(f"final d_loss={last.d_loss:.4f} g_loss={last.g_loss:.4f} l1={last.l1_term:.4f}")
    return EXIT_OK


def cmd_generate(v: dict, out: Path, jobs: int) -> int:
    from .data.io import read_dataset, write_samples
    from .data.segment import segment
    from .data.types import INTERICTAL
    from .gan.synth import synthesize_set
    from .gan.train import load_generator

    ds = read_dataset(v["dataset"])
    try:
        patient = ds.patient(v["patient"])
    except KeyError as e:
        raise UsageError(str(e.args[0])) from None
    pool = [w for w in segment(patient, "detector-train") if w.label == INTERICTAL]
    G = load_generator(v["checkpoint"])
    samples = synthesize_set(G, pool, v["count"], seed=v["seed"])
    path = out / f"synthetic_{v['patient']}.ictw"
    write_samples(samples, path, {"patient": v["patient"], "checkpoint": v["checkpoint"]})
    print(f"wrote {len(samples)} synthetic windows to {path}")
    return EXIT_OK


def _load_windows(path: str, purpose: str):
    from .data.io import read_dataset, read_samples
    from .data.segment import segment

    head = Path(path).read_bytes()[:4]
    if head == b"EEGD":
        ds = read_dataset(path)
        return [w for p in ds.patients for w in segment(p, purpose)]
    if head == b"ICTG":
        return read_samples(path)[0]
    raise FormatError(f"{path}: neither a dataset nor a window-set file")


def cmd_features(v: dict, out: Path, jobs: int) -> int:
    from .features.entropy import FeatureWarning
    from .features.extract import SUBBAND_MODES, write_feature_csv
    from .evaluation.experiment import _features_of

    if v["subband"] not in SUBBAND_MODES:
        raise ConfigError(f"subband must be one of {SUBBAND_MODES}")
    windows = _load_windows(v["input"], v["purpose"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FeatureWarning)
        matrix = _features_of(windows, v["subband"], 1)
    n_warn = sum(issubclass(w.category, FeatureWarning) for w in caught)
    path = out / "features.csv"
    write_feature_csv(path, windows, matrix)
    print(f"wrote {len(windows)} rows x {matrix.shape[1] if len(windows) else 0} features to {path}")
    print(f"feature warnings (degenerate inputs with defined fallback values): {n_warn}")
    return EXIT_OK


def cmd_evaluate(v: dict, out: Path, jobs: int) -> int:
    from .data.io import read_dataset, read_samples
    from .evaluation.experiment import ExperimentConfig, run_experiment
    from .evaluation.report import (
        write_histogram_csv,
        write_histogram_svg,
        write_json,
        write_table_csv,
    )

    ds = read_dataset(v["dataset"])
    pools: dict[str, list] = {}
    for p in filter(None, (s.strip() for s in v["synthetic"].split(","))):
        samples, _ = read_samples(p)
        for s in samples:
            pools.setdefault(s.patient_id, []).append(s)
    cfg = ExperimentConfig(repeats=v["repeats"], n_train=v["n_train"], n_trees=v["n_trees"],
                           exclusion_floor=v["exclusion_floor"], subband=v["subband"],
                           seed=v["seed"])
    report = run_experiment(ds, pools, cfg, jobs=jobs)
    problems = report.check_consistency()
    write_json(report, out / "report.json")
    write_table_csv(report, out / "report.csv")
    write_histogram_csv(report.histogram, out / "histogram.csv")
    write_histogram_svg(report.histogram, out / "histogram.svg",
                        "gmean difference, synthetic minus baseline")
    for r in report.rows:
        print(f"{r.patient_id}: baseline {100 * r.baseline:.2f}  synthetic {100 * r.synthetic:.2f}"
              f"  diff {100 * r.difference:+.2f}")
    print(f"TOTAL: baseline {100 * report.baseline_total:.2f}  synthetic "
          f"{100 * report.synthetic_total:.2f}  diff {100 * report.total_difference:+.2f}")
    print(f"excluded: {report.excluded or 'none'}; skipped: {report.skipped or 'none'}")
    if problems:
        for p in problems:
            print(f"consistency check failed: {p}", file=sys.stderr)
        return EXIT_NUMERICAL
    print("report self-consistency check passed")
    return EXIT_OK


def cmd_verify(v: dict, out: Path, jobs: int) -> int:
    from .evaluation.table1 import load_table, verify_table

    try:
        rows = load_table(v["table"] or None)
    except FileNotFoundError as e:
        raise OSError(str(e)) from None
    checks = verify_table(rows, v["total_tol"], v["diff_tol"], v["p_tol"])
    for c in checks:
        print(c.line())
    failed = [c.name for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


COMMANDS: dict[str, Callable[[dict, Path, int], int]] = {
    "surrogate": cmd_surrogate,
    "ingest": cmd_ingest,
    "train-gan": cmd_train_gan,
    "generate": cmd_generate,
    "features": cmd_features,
    "evaluate": cmd_evaluate,
    "verify": cmd_verify,
}

DESCRIPTIONS = {
    "surrogate": "write a synthetic multi-patient EEG dataset",
    "ingest": "convert CSV recordings into a dataset file",
    "train-gan": "train a generator with one patient left out",
    "generate": "translate a patient's inter-ictal windows into synthetic ictal windows",
    "features": "extract the 108-feature matrix as CSV",
    "evaluate": "run the repeated detector experiment and write the report",
    "verify": "recompute the published results table statistics",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ictalgan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ictalgan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, spec in PARAMS.items():
        keys = ", ".join(f"{k}={'<required>' if p.default is REQUIRED else p.default}"
                         for k, p in {**COMMON, **spec}.items())
        p = sub.add_parser(name, help=DESCRIPTIONS[name], description=DESCRIPTIONS[name],
                           epilog=f"keys: {keys}")
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--jobs", type=int, default=1, help="worker processes")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one key (repeatable)")
        p.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = {}
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            k, val = item.split("=", 1)
            overrides[k.strip()] = val.strip()
        if args.seed is not None:
            overrides["seed"] = str(args.seed)
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        file_values = read_config_file(args.config) if args.config else {}
        values = resolve(args.command, file_values, dict(os.environ), overrides)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_snapshot(out, args.command, values)
        np.seterr(all="ignore")
        return COMMANDS[args.command](values, out, args.jobs)
    except IctalGanError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code if e.exit_code != 1 else EXIT_NUMERICAL
    except (KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except FloatingPointError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
