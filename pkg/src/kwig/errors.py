"""Exception types raised across the package."""


class KwigError(Exception):
    """Base class for all library errors."""


class UnsupportedSizeError(KwigError, ValueError):
    """A field or variable family would need more than 2^63 elements."""


class EnumerationTooLargeError(KwigError):
    """Exhaustive seed enumeration exceeds the configured budget."""


class PreconditionError(KwigError, ValueError):
    """A bound was queried outside the range where its hypothesis holds."""


class InfeasibleDesignError(KwigError, ValueError):
    """No block design with the requested block size fits on N vertices."""


class DefianceImpossibleError(KwigError, ValueError):
    """The pattern has rho(H) = 2, so no construction can defy its threshold."""


class BudgetExceededError(KwigError):
    """An oracle input is larger than its documented budget."""


class ConvergenceError(KwigError):
    """An iterative method hit its iteration cap; ``estimate`` is the best value seen."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class CertificateError(KwigError):
    """An oracle produced a certificate that its independent checker rejects."""


def require(condition: bool, message: str) -> None:
    """Certificate check that stays active under ``python -O``."""
    if not condition:
        raise CertificateError(message)
