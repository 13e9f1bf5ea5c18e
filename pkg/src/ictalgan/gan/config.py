from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..errors import ConfigError

# (length, channels) of the encoder block outputs at full scale, input first.
PAPER_ENCODER_SHAPES = [(2048, 1), (1024, 64), (512, 64), (256, 128), (128, 128),
                        (64, 256), (32, 256), (16, 512), (8, 1024)]
PAPER_DECODER_SHAPES = [(16, 1024), (16, 512), (32, 256), (64, 256), (128, 128),
                        (256, 128), (512, 64), (1024, 64), (2048, 1)]


@dataclass(frozen=True)
class ArchitectureConfig:
    input_length: int = 2048
    channels: tuple[int, ...] = (64, 64, 128, 128, 256, 256, 512, 1024)
    kernel: int = 31
    leaky_slope: float = 0.2
    width_scale: float = 1.0
    skip_mode: str = "scalar"  # or "channel": one learned weight per channel
    init_std: float = 0.02

    def __post_init__(self):
        if self.kernel % 2 == 0 or self.kernel < 1:
            raise ConfigError(f"kernel must be a positive odd integer, got {self.kernel}")
        if len(self.channels) != 8:
            raise ConfigError("the encoder has exactly eight blocks")
        if self.input_length % 2 ** len(self.channels):
            raise ConfigError(f"input_length {self.input_length} must be divisible by 256")
        if self.skip_mode not in ("scalar", "channel"):
            raise ConfigError(f"unknown skip_mode {self.skip_mode!r}")
        if self.width_scale <= 0 or self.width_scale > 1:
            raise ConfigError("width_scale must lie in (0, 1]")
        if any(c * self.width_scale < 1 for c in self.channels):
            raise ConfigError(f"width_scale {self.width_scale} leaves a block without channels")

    @property
    def widths(self) -> list[int]:
        return [int(round(c * self.width_scale)) for c in self.channels]

    @property
    def latent_length(self) -> int:
        return self.input_length // 2 ** len(self.channels)

    @property
    def latent_shape(self) -> tuple[int, int]:
        """(channels, length) of the latent code and of the noise."""
        return self.widths[-1], self.latent_length

    def encoder_shapes(self) -> list[tuple[int, int]]:
        """(length, channels) after each encoder block, input first."""
        shapes = [(self.input_length, 1)]
        length = self.input_length
        for w in self.widths:
            length //= 2
            shapes.append((length, w))
        return shapes

    def decoder_shapes(self) -> list[tuple[int, int]]:
        """(length, channels) of the decoder maps, noise-concatenated entry first."""
        enc = self.encoder_shapes()
        lat_len, lat_ch = enc[-1]
        shapes = [(2 * lat_len, lat_ch)]
        # mirror of the encoder minus the latent: 16x512, 32x256, ..., 1024x64, 2048x1
        shapes.extend(enc[-2::-1])
        return shapes

    def to_dict(self) -> dict:
        d = asdict(self)
        d["channels"] = list(self.channels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ArchitectureConfig":
        d = dict(d)
        if "channels" in d:
            d["channels"] = tuple(d["channels"])
        return cls(**d)


@dataclass(frozen=True)
class GanTrainConfig:
    lam: float = 100.0
    beta1: float = 0.0
    beta2: float = 0.9
    lr_g: float = 1e-4
    lr_d: float = 4e-4
    batch_size: int = 100
    steps: int = 1000
    seed: int = 0
    checkpoint_every: int = 0
    sn_iters: int = 1

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        if self.batch_size < 2:
            raise ConfigError("minibatch size must be at least 2")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


SMOKE_ARCH = ArchitectureConfig(input_length=256, width_scale=0.125)
