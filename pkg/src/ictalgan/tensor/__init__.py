from .engine import (
    Tape,
    Tensor,
    abs_,
    backward,
    concat,
    default_dtype,
    leaky_relu,
    mean,
    no_record,
    precision,
    reshape,
    set_debug,
    sigmoid,
    sqrt,
    sum_,
    tanh,
)
from .nn import conv1d, dense, maxpool1d, transposed_conv1d
from .norm import SpectralNormState, VbnState, power_iterate, spectral_normalize, virtual_batch_norm
from .optim import AdamState, adam_step

__all__ = [
    "AdamState",
    "SpectralNormState",
    "Tape",
    "Tensor",
    "VbnState",
    "abs_",
    "adam_step",
    "backward",
    "concat",
    "conv1d",
    "default_dtype",
    "dense",
    "leaky_relu",
    "maxpool1d",
    "mean",
    "no_record",
    "power_iterate",
    "precision",
    "reshape",
    "set_debug",
    "sigmoid",
    "spectral_normalize",
    "sqrt",
    "sum_",
    "tanh",
    "transposed_conv1d",
    "virtual_batch_norm",
]
