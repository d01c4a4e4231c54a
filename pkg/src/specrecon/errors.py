"""Exception hierarchy.

Each class carries the process exit code the command-line front end maps it to.
"""


class SpecReconError(Exception):
    exit_code = 1


class ConfigError(SpecReconError, ValueError):
    """Invalid user configuration: bad arguments, protocol or manifest fields."""

    exit_code = 2


class DataError(SpecReconError, ValueError):
    """Malformed or out-of-contract input data."""

    exit_code = 3


class NumericalError(SpecReconError, ArithmeticError):
    """A numerical routine failed or produced a result outside its contract."""

    exit_code = 4
