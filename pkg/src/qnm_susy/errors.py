"""Exception types shared across the package."""


class QnmSusyError(Exception):
    """Base class for all package errors."""


class PotentialError(QnmSusyError):
    """Invalid potential data or incompatible potential operands."""


class PropagationError(QnmSusyError):
    """Integration produced non-finite values.

    Carries the last abscissa at which the state was still finite.
    """

    def __init__(self, message, last_good_x=None):
        super().__init__(message)
        self.last_good_x = last_good_x


class ContourError(QnmSusyError):
    """Contour count failed: root on (or too near) the contour, or the
    quadrature did not settle on an integer."""


class RootSearchError(QnmSusyError):
    """Root search could not complete as requested."""


class UnclassifiableError(QnmSusyError):
    """Frequency too close to zero to classify."""


class IneligibleGeneratorError(QnmSusyError):
    """Candidate mode cannot be used as a SUSY generator."""


class ExcludedSubspaceError(QnmSusyError):
    """Normalized mapping requested at one of the two privileged frequencies."""


class JordanBlockError(QnmSusyError):
    """A mode with (numerically) vanishing norm was used where a nonzero
    norm is required; the Jordan-block machinery applies instead."""


class ConsistencyError(QnmSusyError):
    """Two independent evaluation routes disagreed beyond tolerance."""


class ConfigError(QnmSusyError):
    """Invalid run configuration."""
