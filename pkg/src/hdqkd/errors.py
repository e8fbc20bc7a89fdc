"""Exception types raised across the package."""


class HDQKDError(Exception):
    """Base class for all package errors."""


class DimensionError(HDQKDError, ValueError):
    """Operands have incompatible dimensions, or a dimension is out of range."""


class DegenerateInputError(HDQKDError, ValueError):
    """A computation would divide by a zero probability mass."""


class TopologyError(HDQKDError, ValueError):
    """An optical network routes amplitude outside its declared modes."""


class ConfigError(HDQKDError, ValueError):
    """A scenario, network or data file failed validation.

    The message names the offending field and, where known, the line.
    """
