"""Exception hierarchy shared by all subpackages.

Each class carries the process exit code the CLI maps it to.
"""


class IctalGanError(Exception):
    exit_code = 1


class UsageError(IctalGanError):
    exit_code = 2


class ConfigError(UsageError):
    pass


class DimensionError(IctalGanError, ValueError):
    exit_code = 2


class StateError(IctalGanError, RuntimeError):
    exit_code = 2


class FormatError(IctalGanError):
    exit_code = 4


class UnsupportedVersionError(FormatError):
    pass


class NumericalError(IctalGanError, FloatingPointError):
    exit_code = 5


class TrainingError(NumericalError):
    pass


class FitError(IctalGanError, ValueError):
    exit_code = 5
