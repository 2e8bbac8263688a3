"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: invalid input or configuration
exits with 2, numerical failures with 3, capacity violations with 4.
"""


class HybridRadianceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HybridRadianceError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(DomainError):
    """A run configuration document is malformed or inconsistent."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class CapacityError(HybridRadianceError):
    """A requested Hilbert-space dimension exceeds the configured cap."""


class NumericalError(HybridRadianceError):
    """A numerical routine failed to produce a trustworthy result."""


class RootNotFoundError(NumericalError):
    """No sign change was found in the scanned root bracket."""


class DegeneracyError(NumericalError):
    """Eigenmode matching was ambiguous due to near-degenerate eigenvalues."""


class IntegrationError(NumericalError):
    """Time integration lost accuracy; retry with a smaller step."""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CAPACITY = 4


def exit_code_for(exc: BaseException) -> int:
    """Exit code the CLI reports for ``exc``."""
    if isinstance(exc, CapacityError):
        return EXIT_CAPACITY
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, (DomainError, ValueError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL
