"""Exception types shared across the package.

The CLI maps these onto process exit codes: invalid arguments exit 2,
numerical failures exit 3, file problems exit 4.
"""


class DppIpaError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(DppIpaError, ValueError):
    """A precondition on user-supplied arguments was violated."""


class ShellViolationError(InvalidArgumentError):
    """Requested orbital count does not close a degenerate frequency shell."""

    def __init__(self, k: int, lower: int, upper: int):
        self.k = k
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"k={k} does not close a frequency shell; "
            f"nearest closing values are {lower} and {upper}"
        )


class TooLargeError(InvalidArgumentError):
    """Problem size exceeds a guard meant to keep brute force at desk scale."""


class UndefinedSpreadError(InvalidArgumentError):
    """Spread requested for an identically zero column."""


class RankDeficientError(DppIpaError):
    """Pivoted QR found a residual column norm below the rank tolerance."""


class IllConditionedError(DppIpaError):
    """A matrix that must be positive definite has a near-zero eigenvalue."""

    def __init__(self, message: str, eigenvalue: float):
        self.eigenvalue = eigenvalue
        super().__init__(f"{message} (offending eigenvalue {eigenvalue:.3e})")


class NumericalFailureError(DppIpaError):
    """An eigensolve or sampling recursion broke down numerically."""


class DegenerateRegionError(DppIpaError):
    """A partition region carries no probability mass."""

    def __init__(self, region: int):
        self.region = region
        super().__init__(f"region {region} has no cells with positive density")


class FileFormatError(DppIpaError, OSError):
    """A binary artifact file is malformed or has the wrong magic/version."""
