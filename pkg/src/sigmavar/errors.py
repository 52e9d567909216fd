"""Exception and warning types shared across the package."""


class SigmaVarError(ValueError):
    """Base class for input and domain errors raised by this package."""


class DomainError(SigmaVarError):
    """A numeric argument lies outside the mathematical domain of an operation."""


class ConstraintViolationError(SigmaVarError):
    """A kernel failed a positive-semidefiniteness requirement.

    Carries the offending minimum eigenvalue in ``min_eigenvalue``.
    """

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = float(min_eigenvalue)


class BasisSizeError(SigmaVarError):
    """A requested truncated Fock basis would exceed the configured size cap."""

    def __init__(self, message: str, estimated_size: int):
        super().__init__(message)
        self.estimated_size = int(estimated_size)


class ConfigurationError(SigmaVarError):
    """Invalid or incomplete run configuration."""


class TruncationLeakWarning(UserWarning):
    """A truncated Fock state populates its top occupation sector noticeably.

    Kernel expectations on the state itself stay exact, but the state can no
    longer faithfully represent targets that need higher sectors.
    """
