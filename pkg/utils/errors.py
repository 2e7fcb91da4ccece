"""
Exception types shared across the engine.

ConfigError maps to CLI exit code 1, NumericalGuardError (and its subclasses
declared next to the code that raises them) to exit code 2.
"""


class ConfigError(Exception):
    """Raised when a run configuration is missing, malformed or invalid."""
    pass


class NumericalGuardError(Exception):
    """Raised when a numerical invariant (completeness, trace, PSD, window) fails."""
    pass


__all__ = [
    "ConfigError",
    "NumericalGuardError",
]
