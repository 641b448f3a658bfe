"""Exception types shared across the toolkit."""
from __future__ import annotations


class ConfigurationError(ValueError):
    """Invalid parameter values or geometry that cannot be set up."""


class DimensionError(ValueError):
    """Array arguments whose shapes do not agree."""


class FormatError(ValueError):
    """Malformed serialized data (factor files, WAV headers, ...)."""


class InputError(ValueError):
    """Unusable user-supplied input (audio, method names, ...)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a usable result."""
