"""Exception types shared across the package."""


class SeqgpError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(SeqgpError, ValueError):
    """Operands come from incompatible spaces or have mismatched shapes."""


class SizeGuardError(SeqgpError, ValueError):
    """A dense enumeration would exceed the configured desk-scale cap."""


class ParameterError(SeqgpError, ValueError):
    """A parameter lies outside its valid domain, or an invariant fails."""


class InvalidIndexError(SeqgpError, ValueError):
    """A coefficient index is not valid for the requested transform kind."""


class NumericalError(SeqgpError, RuntimeError):
    """A matrix factorization or solve failed beyond recovery."""


class ConfigError(SeqgpError, ValueError):
    """A run configuration is malformed or internally inconsistent."""


class DataError(SeqgpError, ValueError):
    """Training data or query input is malformed."""
