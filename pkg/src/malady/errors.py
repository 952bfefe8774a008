"""Exception hierarchy shared by every module."""


class MaladyError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(MaladyError, ValueError):
    """A parameter is outside its admissible range."""


class InfeasibleError(MaladyError):
    """Class-size bounds admit no complete assignment."""


class ConvergenceError(MaladyError, RuntimeError):
    """An auction exceeded its bidding-event cap."""


class ConfigError(MaladyError, ValueError):
    """Malformed or inconsistent experiment configuration."""


class FormatError(MaladyError, ValueError):
    """An input file does not parse."""
