"""Exception and warning types shared across the package."""


class MuhsError(Exception):
    """Base class for all errors raised by muhs."""


class InvalidArgumentError(MuhsError, ValueError):
    """Input is non-finite, malformed or structurally incompatible."""


class DomainError(MuhsError, ValueError):
    """A parameter lies outside the admissible range (order strip, sigma >= 1, ...)."""


class TruncationError(MuhsError):
    """The neglected tail of a half-line integral exceeds the requested tolerance."""

    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = bound


class EvaluationError(MuhsError):
    """A symbol evaluator failed; carries the term index and multi-index."""

    def __init__(self, message, term, alpha):
        super().__init__(message)
        self.term = term
        self.alpha = alpha


class OracleFailure(MuhsError):
    """The dense oracle system is singular or too ill-conditioned to trust."""

    def __init__(self, message, condition):
        super().__init__(message)
        self.condition = condition


class ExponentFitError(MuhsError):
    """Boundary exponent regression rejected (zeros, sign changes, short window)."""


class ModeFailures(MuhsError):
    """One or more tangential modes failed; ``failures`` holds ``(mode_index, exception)``."""

    def __init__(self, failures):
        detail = "; ".join(f"mode {k}: {exc}" for k, exc in failures[:5])
        super().__init__(f"{len(failures)} mode(s) failed: {detail}")
        self.failures = failures


class AccuracyWarning(UserWarning):
    """Result computed, but a monitored accuracy indicator exceeded its tolerance."""


class IllConditionedTraceWarning(AccuracyWarning):
    """Boundary trace fit residual is large; u may lack the expected boundary structure."""
