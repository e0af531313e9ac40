"""Exception types shared across the package."""


class QuasicompactError(Exception):
    """Base class for all package errors."""


class DomainError(QuasicompactError, ValueError):
    """An argument lies outside the domain where a formula or routine applies."""


class KernelError(QuasicompactError, ValueError):
    """A transition kernel is malformed (negative mass, rows not summing to one)."""


class InfeasibleError(QuasicompactError):
    """No weight of the requested family satisfies the drift condition."""


class UnsupportedModelError(QuasicompactError):
    """The requested analysis has no implementation for this model."""


class ConvergenceError(QuasicompactError, RuntimeError):
    """An iterative routine failed to reach its tolerance."""


class TruncationError(QuasicompactError, ValueError):
    """The truncation level is too small for an exact answer on the requested rows."""
