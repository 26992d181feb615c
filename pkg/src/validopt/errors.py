"""Exception types shared across the toolkit."""


class ValidoptError(Exception):
    """Base class for all toolkit errors."""


class ArgumentError(ValidoptError, ValueError):
    """A caller passed an argument outside a function's documented domain."""


class ConfigError(ValidoptError, ValueError):
    """A configuration value is malformed or inconsistent."""


class DataError(ValidoptError, ValueError):
    """Input data violates a documented precondition (shape, finiteness, size)."""


class DimensionError(ValidoptError, ValueError):
    """Array dimensions disagree with the model or domain they are used with."""


class SolverError(ValidoptError, RuntimeError):
    """The LP/MILP engine hit a numerical failure or an internal limit."""
