"""Exception types raised by the library."""


class QHodgeError(Exception):
    """Base class for all library errors."""


class NotUnitTriple(QHodgeError):
    """Coefficients (a, b, c) do not lie on the unit sphere."""


class BandwidthOverflow(QHodgeError):
    """An operation would exceed the working frequency cutoff."""


class ShapeMismatch(QHodgeError):
    """Operands disagree in rank, degree or cutoff."""


class DegreeZero(QHodgeError):
    """Operation undefined on 0-forms."""


class WrongType(QHodgeError):
    """Form is not of the Hodge type the operator requires."""


class NotHermitian(QHodgeError):
    """Connection potential is not fixed by the real structure."""


class SolverBudgetExceeded(QHodgeError):
    """Eigen-solver problem too large for the configured budget."""


class SolverDiverged(QHodgeError):
    """Iterative linear solver failed to reach tolerance."""


class NotClosed(QHodgeError):
    """Input form fails a required closedness check."""


class NotExact(QHodgeError):
    """Input form has a nonzero harmonic part where exactness is required."""


class ObstructionNonzero(QHodgeError):
    """A quadratic term in the deformation recursion is not exact."""


class SeriesDiverging(QHodgeError):
    """Deformation series term norms are increasing."""


class HypothesisViolated(QHodgeError):
    """Connection does not satisfy the hypotheses of the requested check."""


class ConstraintProjectionTooLarge(QHodgeError):
    """Constraint projection moved the input by more than the allowed fraction."""


class StepSizeUnderflow(QHodgeError):
    """Gradient flow step size collapsed below the minimum."""


class ConfigInvalid(QHodgeError):
    """Experiment configuration failed schema validation."""
