"""Alternating least-squares GAN training."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..data.types import PairedExample
from ..errors import TrainingError, UsageError
from ..tensor import AdamState, Tape, Tensor, adam_step, backward, concat, no_record
from ..tensor import checkpoint as ckpt
from .config import ArchitectureConfig, GanTrainConfig
from .losses import d_loss, g_loss_terms
from .model import Discriminator, Generator
from .signal import to_generator_input

log = logging.getLogger(__name__)

LOG_COLUMNS = ("step", "d_loss", "g_loss", "l1_term", "wall_ms")


@dataclass
class StepLog:
    step: int
    d_loss: float
    g_loss: float
    l1_term: float
    wall_ms: float

    def row(self) -> list[str]:
        return [str(self.step), repr(self.d_loss), repr(self.g_loss), repr(self.l1_term),
                f"{self.wall_ms:.3f}"]


@dataclass
class TrainState:
    generator: Generator
    discriminator: Discriminator
    adam_g: AdamState
    adam_d: AdamState
    rng: np.random.Generator
    step: int = 0
    log: list[StepLog] = field(default_factory=list)


def _grads(params) -> dict[str, np.ndarray | None]:
    return {k: p.grad for k, p in params.items()}


def train_step(G, D, x: Tensor, y: Tensor, noise: Tensor, adam_g: AdamState, adam_d: AdamState,
               lam: float, sn_iters: int = 1) -> tuple[float, float, float]:
    """One discriminator update followed by one generator update on the same minibatch.

    ``G`` and ``D`` only need the call signatures of :class:`Generator` and
    :class:`Discriminator` plus ``parameters``/``zero_grad``/``set_requires_grad``.
    """
    batch = x.shape[0]
    with no_record():
        fake = G(x, noise)
    D.set_requires_grad(True)
    D.zero_grad()
    with Tape() as tape:
        scores = D(concat([y, fake.detach()], axis=0), update_sn=True, iters=sn_iters)
        loss_d = d_loss(scores[:batch], scores[batch:])
    backward(loss_d, tape)
    adam_step(D.parameters(), _grads(D.parameters()), adam_d)

    D.set_requires_grad(False)
    G.set_requires_grad(True)
    G.zero_grad()
    with Tape() as tape:
        fake = G(x, noise, update_sn=True, iters=sn_iters)
        adversarial, l1 = g_loss_terms(D(fake), fake, y, lam)
        loss_g = adversarial + l1
    backward(loss_g, tape)
    adam_step(G.parameters(), _grads(G.parameters()), adam_g)
    D.set_requires_grad(True)
    return float(loss_d.data), float(loss_g.data), float(l1.data)


def pairs_to_arrays(pairs: Sequence[PairedExample], input_length: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.stack([to_generator_input(p.input.values, input_length) for p in pairs])
    y = np.stack([to_generator_input(p.target.values, input_length) for p in pairs])
    return x[:, None, :], y[:, None, :]


def init_state(config: GanTrainConfig, arch: ArchitectureConfig) -> TrainState:
    g_seq, d_seq, s_seq = np.random.SeedSequence(config.seed).spawn(3)
    G = Generator.init(arch, np.random.default_rng(g_seq))
    D = Discriminator.init(arch, np.random.default_rng(d_seq))
    return TrainState(
        G, D,
        AdamState(lr=config.lr_g, beta1=config.beta1, beta2=config.beta2),
        AdamState(lr=config.lr_d, beta1=config.beta1, beta2=config.beta2),
        np.random.default_rng(s_seq),
    )


def train(pairs: Sequence[PairedExample], config: GanTrainConfig, arch: ArchitectureConfig,
          log_path: str | Path | None = None, checkpoint_path: str | Path | None = None,
          state: TrainState | None = None) -> TrainState:
    """Train for ``config.steps`` minibatches, continuing ``state`` when given."""
    if not pairs:
        raise UsageError("GAN training needs a non-empty dataset")
    if config.batch_size > len(pairs):
        raise UsageError(f"minibatch {config.batch_size} exceeds dataset size {len(pairs)}")
    x_all, y_all = pairs_to_arrays(pairs, arch.input_length)
    return train_arrays(x_all, y_all, config, arch, log_path, checkpoint_path, state)


def train_arrays(x_all: np.ndarray, y_all: np.ndarray, config: GanTrainConfig,
                 arch: ArchitectureConfig, log_path=None, checkpoint_path=None,
                 state: TrainState | None = None) -> TrainState:
    if state is None:
        state = init_state(config, arch)
    G, D, rng = state.generator, state.discriminator, state.rng
    n = len(x_all)
    batch = config.batch_size
    log_file = writer = None
    if log_path is not None:
        log_path = Path(log_path)
        fresh = not log_path.exists() or log_path.stat().st_size == 0
        log_file = open(log_path, "a", newline="")
        writer = csv.writer(log_file)
        if fresh:
            writer.writerow(LOG_COLUMNS)
    try:
        for _ in range(config.steps):
            t0 = time.perf_counter()
            idx = np.sort(rng.choice(n, size=batch, replace=False))
            x = Tensor(x_all[idx])
            y = Tensor(y_all[idx])
            noise = Tensor(rng.standard_normal((batch,) + arch.latent_shape))
            if not D.vbn.frozen:
                D.freeze_reference(y)
            ld, lg, l1 = train_step(G, D, x, y, noise, state.adam_g, state.adam_d,
                                    config.lam, config.sn_iters)
            state.step += 1
            if not all(math.isfinite(v) for v in (ld, lg, l1)):
                raise TrainingError(
                    f"non-finite loss at step {state.step}: d_loss={ld}, g_loss={lg}, l1={l1}")
            entry = StepLog(state.step, ld, lg, l1, (time.perf_counter() - t0) * 1000.0)
            state.log.append(entry)
            if writer is not None:
                writer.writerow(entry.row())
            if state.step % 100 == 0:
                log.info("step %d d_loss=%.4f g_loss=%.4f l1=%.4f", state.step, ld, lg, l1)
            if (checkpoint_path is not None and config.checkpoint_every
                    and state.step % config.checkpoint_every == 0):
                save_checkpoint(checkpoint_path, state, config)
    finally:
        if log_file is not None:
            log_file.close()
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, state, config)
    return state


def _adam_arrays(prefix: str, s: AdamState) -> dict[str, np.ndarray]:
    out = {}
    for k in s.m:
        out[f"{prefix}.m.{k}"] = s.m[k]
        out[f"{prefix}.v.{k}"] = s.v[k]
    return out


def _adam_from(prefix: str, arrays, meta) -> AdamState:
    s = AdamState(**meta)
    for key, arr in arrays.items():
        if key.startswith(prefix + ".m."):
            name = key[len(prefix) + 3:]
            s.m[name] = arr
            s.v[name] = arrays[f"{prefix}.v.{name}"]
    return s


def save_checkpoint(path, state: TrainState, config: GanTrainConfig | None = None) -> None:
    arrays = {}
    arrays.update(state.generator.state_arrays())
    arrays.update(state.discriminator.state_arrays())
    arrays.update(_adam_arrays("adam_g", state.adam_g))
    arrays.update(_adam_arrays("adam_d", state.adam_d))

    def adam_meta(s: AdamState) -> dict:
        return {"lr": s.lr, "beta1": s.beta1, "beta2": s.beta2, "eps": s.eps, "t": s.t}

    meta = {
        "kind": "gan",
        "step": state.step,
        "arch": state.generator.arch.to_dict(),
        "train": config.to_dict() if config else None,
        "adam_g": adam_meta(state.adam_g),
        "adam_d": adam_meta(state.adam_d),
        "rng": state.rng.bit_generator.state,
    }
    ckpt.save(path, arrays, meta)


def load_checkpoint(path) -> tuple[TrainState, dict]:
    arrays, meta = ckpt.load(path)
    arch = ArchitectureConfig.from_dict(meta["arch"])
    rng = np.random.default_rng(0)
    G = Generator.init(arch, rng)
    D = Discriminator.init(arch, rng)
    G.load_state_arrays(arrays)
    D.load_state_arrays(arrays)
    sample_rng = np.random.default_rng()
    sample_rng.bit_generator.state = meta["rng"]
    state = TrainState(G, D, _adam_from("adam_g", arrays, meta["adam_g"]),
                       _adam_from("adam_d", arrays, meta["adam_d"]), sample_rng,
                       step=int(meta["step"]))
    return state, meta


def load_generator(path) -> Generator:
    return load_checkpoint(path)[0].generator
