"""Exception types raised by the toolkit."""


class ToolkitError(Exception):
    """Base class for all qrelent errors."""


class NonHermitianInput(ToolkitError):
    """A matrix failed the hermiticity invariant."""


class NotPositiveSemidefinite(ToolkitError):
    """An eigenvalue fell below the negative clamping band."""


class DimensionMismatch(ToolkitError):
    """Operand dimensions are incompatible."""


class NonPositiveWeight(ToolkitError):
    """The weight operator in a trace pairing is not positive semidefinite."""


class NegativeInput(ToolkitError):
    """A scalar argument required to be nonnegative was negative."""


class InfiniteBaseDivergence(ToolkitError):
    """A scaling identity was requested for a pair with infinite divergence."""


class IndeterminateIdentity(ToolkitError):
    """An identity check hit an infinite term and cannot form a residual."""


class InvalidQuantumMap(ToolkitError):
    """The Kraus family is not even trace-non-increasing."""


class ThresholdCollision(ToolkitError):
    """A ladder threshold sits too close to an eigenvalue of the sequence."""


class HypothesisViolation(ToolkitError):
    """Input data falsifies a testable hypothesis of a limit-bound check."""


class NonCommutingSigma(ToolkitError):
    """The pinching projector does not commute with the reference operator."""


class SymmetryViolation(ToolkitError):
    """The unitary does not fix the reference operator."""


class LadderInconsistent(ToolkitError):
    """A projector ladder violates a consistency condition it must satisfy."""


class LadderConstructionFailure(ToolkitError):
    """No admissible threshold ladder could be built for the sequence."""


class InfiniteLimitDivergence(ToolkitError):
    """The divergence at the limit pair is infinite, so no jump is defined."""


class FamilyEvaluationError(ToolkitError):
    """A state-sequence family cannot be evaluated at the requested index."""


class FileFormatError(ToolkitError):
    """A matrix, channel, or family file does not match the documented grammar."""
