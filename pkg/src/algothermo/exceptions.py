"""Exception hierarchy shared by every module."""


class AlgoThermoError(Exception):
    """Base class for all package errors."""


class DomainError(AlgoThermoError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ParseError(AlgoThermoError, ValueError):
    """A bit string is not a (complete) program or core; the machine never halts on it."""


class UnsatisfiableError(AlgoThermoError):
    """No enumerated program satisfies the requested constraint."""


class TableBoundError(UnsatisfiableError):
    """The enumeration bound is too small for the requested window.

    Re-enumerate with a larger ``max_core_length``.
    """


class ConfigError(AlgoThermoError, ValueError):
    """Invalid configuration; ``line`` points into the source file when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
