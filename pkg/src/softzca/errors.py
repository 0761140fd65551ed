"""Exception hierarchy shared by the library and the CLI.

Every exception carries the process exit code the CLI maps it to:
input/format problems exit 2, numerical failures exit 3, configuration
mistakes exit 4.
"""


class SoftZcaError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InputError(SoftZcaError):
    """Invalid input data: bad shapes, non-finite entries, too few samples."""

    exit_code = 2


class FormatError(InputError):
    """Unreadable or malformed file (matrix, transform, or manifest)."""


class ZeroVectorError(InputError):
    """A row with zero norm where cosine similarity is required."""


class NumericalError(SoftZcaError):
    """A numerically impossible operation on otherwise well-formed input."""

    exit_code = 3


class RankZeroError(NumericalError):
    """Covariance with no positive eigenvalue: whitening is undefined."""


class DecompositionError(NumericalError):
    """Matrix decomposition failed (e.g. Cholesky on a non-PD matrix)."""


class DegenerateCloudError(NumericalError):
    """Point cloud with zero variance in every direction."""


class ConfigError(SoftZcaError):
    """Invalid run configuration or command-line usage."""

    exit_code = 4
