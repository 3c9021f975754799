"""Exception hierarchy shared across the package.

``ValueError`` is used for bad arguments and domain violations on scalar
inputs; the classes below mark failures that the CLI maps to distinct
exit codes.
"""


class RatecastError(Exception):
    """Base class for package-specific failures."""


class DataError(RatecastError):
    """Malformed or inconsistent input data (CSV cells, coverage, signs)."""


class NumericalError(RatecastError):
    """A numerical routine failed: non-convergence, degenerate decomposition,
    or a pipeline stage breaking down mid-evaluation."""
