"""Exception hierarchy shared across the package."""


class EEGAlignError(Exception):
    """Base class for all errors raised by eegalign."""


class ArchiveError(EEGAlignError):
    """Malformed or inconsistent on-disk archive."""


class InvariantError(EEGAlignError, ValueError):
    """A data-model invariant does not hold (shape, finiteness, counts)."""


class NotPositiveDefiniteError(EEGAlignError, ValueError):
    """Matrix expected to be SPD is not."""


class IllConditionedError(NotPositiveDefiniteError):
    """Eigenvalue below the conditioning floor for an operation that inverts it."""


class EigenDecompositionError(EEGAlignError, ArithmeticError):
    """The symmetric eigensolver failed to converge."""


class EpochBoundsError(EEGAlignError, IndexError):
    """An epoch window falls outside the recording."""


class PipelineError(EEGAlignError, ValueError):
    """Incompatible pipeline configuration or a stage failure with context."""


class ConfigError(EEGAlignError, ValueError):
    """Run configuration violates the schema."""


class ConvergenceWarning(UserWarning):
    """An iterative solver stopped at its iteration cap."""
