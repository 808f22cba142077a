"""Exception types shared across the package."""


class DmfawError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(DmfawError, ValueError):
    """Operands have incompatible or unsupported shapes."""


class DataError(DmfawError, ValueError):
    """A dataset, manifest, or label file is malformed."""


class FitError(DmfawError, RuntimeError):
    """The optimizer hit a non-recoverable state (e.g. non-finite loss)."""
