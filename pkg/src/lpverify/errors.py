"""Exception types shared across the toolkit."""


class LPVerifyError(Exception):
    """Base class for all toolkit errors."""


class GridError(LPVerifyError, ValueError):
    """Invalid grid parameters or mismatched grids."""


class FieldError(LPVerifyError, ValueError):
    """Bad field data: wrong shape, non-finite values, broken invariants."""


class AliasingGuardError(LPVerifyError, ValueError):
    """A product's bandwidth cannot be resolved without aliasing."""


class WindowError(LPVerifyError, ValueError):
    """Dyadic window or guard-band requirement violated."""


class SnapshotFormatError(LPVerifyError, ValueError):
    """Snapshot file rejected: bad magic, version, or truncated payload."""


class SpectrumSpecError(LPVerifyError, ValueError):
    """Invalid field-generation spec."""


class PicardError(LPVerifyError, RuntimeError):
    """Fixed-point iteration diverged or failed to converge."""


class ConfigError(LPVerifyError, ValueError):
    """Suite configuration rejected."""


class ResourceBudgetError(LPVerifyError, RuntimeError):
    """Estimated memory exceeds the configured budget."""
