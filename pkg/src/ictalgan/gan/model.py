"""U-net generator and encoder-shaped discriminator."""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError
from ..tensor import (
    SpectralNormState,
    Tensor,
    VbnState,
    concat,
    conv1d,
    dense,
    leaky_relu,
    maxpool1d,
    reshape,
    sigmoid,
    spectral_normalize,
    tanh,
    transposed_conv1d,
    virtual_batch_norm,
)
from .config import ArchitectureConfig


class _Network:
    prefix = ""

    def __init__(self, arch: ArchitectureConfig, params: dict[str, Tensor],
                 sn: dict[str, SpectralNormState]):
        self.arch = arch
        self.params = params
        self.sn = sn

    def _w(self, name: str, update_sn: bool, iters: int) -> Tensor:
        return spectral_normalize(self.params[name], self.sn[name], iters=iters, update=update_sn)

    def parameters(self) -> dict[str, Tensor]:
        return self.params

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def set_requires_grad(self, flag: bool) -> None:
        for p in self.params.values():
            p.requires_grad = flag

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = {f"{self.prefix}.{k}": v.data for k, v in self.params.items()}
        for k, s in self.sn.items():
            out[f"{self.prefix}.sn_u.{k}"] = s.u
            out[f"{self.prefix}.sn_v.{k}"] = s.v
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for k, p in self.params.items():
            key = f"{self.prefix}.{k}"
            if key not in arrays or arrays[key].shape != p.shape:
                raise DimensionError(f"checkpoint tensor {key!r} missing or mis-shaped")
            p.data = arrays[key].astype(p.dtype)
        for k, s in self.sn.items():
            s.u = arrays[f"{self.prefix}.sn_u.{k}"].astype(np.float64)
            s.v = arrays[f"{self.prefix}.sn_v.{k}"].astype(np.float64)

    def astype(self, dtype) -> None:
        for p in self.params.values():
            p.data = p.data.astype(dtype)


def _conv_param(rng, shape, std, dtype) -> Tensor:
    return Tensor(rng.normal(0.0, std, size=shape), requires_grad=True, dtype=dtype)


def _encoder_params(arch: ArchitectureConfig, rng, dtype, prefix: str):
    params, sn = {}, {}
    c_in = 1
    for i, w in enumerate(arch.widths):
        name = f"{prefix}{i}.w"
        params[name] = _conv_param(rng, (w, c_in, arch.kernel), arch.init_std, dtype)
        sn[name] = SpectralNormState.for_weight(params[name].data, rng)
        c_in = w
    return params, sn


class Generator(_Network):
    """Maps a flattened inter-ictal window (B, 1, L) plus latent noise to (B, 1, L).

    Decoder block 0 is a stride-1 convolution that halves the channels of the
    noise-concatenated latent; blocks 1..7 are stride-2 transposed convolutions.
    Skip ``k`` adds ``skip_k * encoder_map`` to the output of decoder block ``k``
    for k = 0..6; the input and the latent layers have no skip.
    """

    prefix = "G"
    n_skips = 7

    @classmethod
    def init(cls, arch: ArchitectureConfig, rng: np.random.Generator, dtype=np.float32) -> "Generator":
        params, sn = _encoder_params(arch, rng, dtype, "enc")
        widths = arch.widths
        dec_out = list(reversed(widths[:-1])) + [1]
        c_in = widths[-1]
        for i, c_out in enumerate(dec_out):
            name = f"dec{i}.w"
            # conv weights are (out, in, K); transposed conv weights are (in, out, K)
            shape = (c_out, c_in, arch.kernel) if i == 0 else (c_in, c_out, arch.kernel)
            params[name] = _conv_param(rng, shape, arch.init_std, dtype)
            sn[name] = SpectralNormState.for_weight(params[name].data, rng)
            c_in = c_out
        for k in range(cls.n_skips):
            ch = dec_out[k]
            shape = (1,) if arch.skip_mode == "scalar" else (ch,)
            params[f"skip{k}"] = Tensor(np.ones(shape), requires_grad=True, dtype=dtype)
        return cls(arch, params, sn)

    def encode(self, x: Tensor, update_sn: bool = False, iters: int = 1,
               trace: list | None = None) -> tuple[Tensor, list[Tensor]]:
        """Return the latent code and the per-block encoder maps (shallowest first)."""
        arch = self.arch
        if x.ndim != 3 or x.shape[1] != 1 or x.shape[2] != arch.input_length:
            raise DimensionError(f"generator expects (B, 1, {arch.input_length}), got {x.shape}")
        if trace is not None:
            trace.append((x.shape[2], x.shape[1]))
        maps = []
        h = x
        for i in range(len(arch.widths)):
            w = self._w(f"enc{i}.w", update_sn, iters)
            h = maxpool1d(leaky_relu(conv1d(h, w), arch.leaky_slope))
            maps.append(h)
            if trace is not None:
                trace.append((h.shape[2], h.shape[1]))
        return h, maps

    def decode(self, latent: Tensor, noise: Tensor, maps: list[Tensor], update_sn: bool = False,
               iters: int = 1, trace: list | None = None) -> Tensor:
        arch = self.arch
        if noise.shape != latent.shape:
            raise DimensionError(f"noise shape {noise.shape} != latent shape {latent.shape}")
        h = concat([latent, noise], axis=2)
        if trace is not None:
            trace.append((h.shape[2], h.shape[1]))
        n_dec = len(arch.widths)
        for i in range(n_dec):
            w = self._w(f"dec{i}.w", update_sn, iters)
            if i == 0:
                h = conv1d(h, w)
            else:
                h = transposed_conv1d(h, w, stride=2)
            if i == n_dec - 1:
                h = tanh(h)
            else:
                h = leaky_relu(h, arch.leaky_slope)
                enc_map = maps[n_dec - 2 - i]
                h = apply_skip(enc_map, h, self.params[f"skip{i}"])
            if trace is not None:
                trace.append((h.shape[2], h.shape[1]))
        return h

    def __call__(self, x: Tensor, noise: Tensor, update_sn: bool = False, iters: int = 1,
                 trace: list | None = None) -> Tensor:
        latent, maps = self.encode(x, update_sn, iters, trace)
        return self.decode(latent, noise, maps, update_sn, iters, trace)


def apply_skip(encoder_map: Tensor, decoder_map: Tensor, skip_weight: Tensor) -> Tensor:
    """``decoder_map + skip_weight * encoder_map``; a per-channel weight broadcasts over length."""
    if encoder_map.shape != decoder_map.shape:
        raise DimensionError(f"skip shape mismatch: {encoder_map.shape} vs {decoder_map.shape}")
    if skip_weight.size > 1:
        skip_weight = reshape(skip_weight, (-1, 1))
    return decoder_map + encoder_map * skip_weight


class Discriminator(_Network):
    """Encoder-shaped critic: conv -> VBN -> LeakyReLU -> max-pool per block, then dense + sigmoid."""

    prefix = "D"

    def __init__(self, arch, params, sn, vbn: VbnState | None = None):
        super().__init__(arch, params, sn)
        self.vbn = vbn or VbnState()

    @classmethod
    def init(cls, arch: ArchitectureConfig, rng: np.random.Generator, dtype=np.float32) -> "Discriminator":
        params, sn = _encoder_params(arch, rng, dtype, "blk")
        for i, w in enumerate(arch.widths):
            params[f"blk{i}.gain"] = Tensor(np.ones(w), requires_grad=True, dtype=dtype)
            params[f"blk{i}.shift"] = Tensor(np.zeros(w), requires_grad=True, dtype=dtype)
        ch, length = arch.latent_shape
        params["head.w"] = _conv_param(rng, (1, ch * length), arch.init_std, dtype)
        params["head.b"] = Tensor(np.zeros(1), requires_grad=True, dtype=dtype)
        sn["head.w"] = SpectralNormState.for_weight(params["head.w"].data, rng)
        return cls(arch, params, sn)

    def logits(self, x: Tensor, update_sn: bool = False, iters: int = 1,
               collect_reference: bool = False) -> Tensor:
        arch = self.arch
        if x.ndim != 3 or x.shape[1] != 1 or x.shape[2] != arch.input_length:
            raise DimensionError(f"discriminator expects (B, 1, {arch.input_length}), got {x.shape}")
        h = x
        for i in range(len(arch.widths)):
            w = self._w(f"blk{i}.w", update_sn, iters)
            h = conv1d(h, w)
            h = virtual_batch_norm(h, self.vbn, f"blk{i}", self.params[f"blk{i}.gain"],
                                   self.params[f"blk{i}.shift"], collect=collect_reference)
            h = maxpool1d(leaky_relu(h, arch.leaky_slope))
        flat = reshape(h, (h.shape[0], -1))
        head = self._w("head.w", update_sn, iters)
        return reshape(dense(flat, head, self.params["head.b"]), (-1,))

    def __call__(self, x: Tensor, update_sn: bool = False, iters: int = 1) -> Tensor:
        return sigmoid(self.logits(x, update_sn, iters))

    def freeze_reference(self, reference: Tensor) -> None:
        """Collect VBN statistics layer by layer from ``reference`` and freeze them."""
        from ..tensor import no_record

        with no_record():
            self.logits(reference, collect_reference=True)
        self.vbn.freeze()

    def state_arrays(self) -> dict[str, np.ndarray]:
        out = super().state_arrays()
        for layer in self.vbn.means:
            out[f"D.vbn_mean.{layer}"] = self.vbn.means[layer]
            out[f"D.vbn_sq.{layer}"] = self.vbn.sq_means[layer]
        out["D.vbn_ref_size"] = np.array([self.vbn.ref_size], dtype=np.int64)
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        super().load_state_arrays(arrays)
        vbn = VbnState()
        for key, arr in arrays.items():
            if key.startswith("D.vbn_mean."):
                layer = key[len("D.vbn_mean."):]
                vbn.means[layer] = arr.astype(np.float64)
                vbn.sq_means[layer] = arrays[f"D.vbn_sq.{layer}"].astype(np.float64)
        vbn.ref_size = int(arrays.get("D.vbn_ref_size", np.array([0]))[0])
        vbn.frozen = bool(vbn.means)
        self.vbn = vbn
