"""Exception hierarchy.

Everything raised for bad input derives from :class:`ValidationError`
(a ``ValueError``); numerically impossible requests raise
:class:`InfeasibleError`.  The command line maps the two families to exit
codes 2 and 3.
"""


class DTMIError(Exception):
    """Base class for all package errors."""


class ValidationError(DTMIError, ValueError):
    """Input failed a precondition."""


class InfeasibleError(DTMIError, ArithmeticError):
    """Inputs are well formed but describe an impossible quantity."""


# core
class DuplicateLabel(ValidationError):
    pass


class PriorNotNormalized(ValidationError):
    pass


class TooFewStates(ValidationError):
    pass


class NonFiniteData(ValidationError):
    pass


class RowCountMismatch(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


# infotheory
class InvalidDistribution(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class NonPositiveArgument(ValidationError):
    pass


class DegenerateCorrelation(ValidationError):
    pass


# knn_mi
class TooFewSamples(ValidationError):
    pass


class DegenerateData(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class TooManySamples(ValidationError):
    pass


# bounds
class InvalidArguments(ValidationError):
    pass


class NonPositiveEpsilon(ValidationError):
    pass


class Infeasible(InfeasibleError):
    pass


# typicality / simchannel
class DecodeError(DTMIError):
    """The typicality rule declared an error; a legitimate outcome."""


class DecodeAmbiguous(DecodeError):
    pass


class DecodeEmpty(DecodeError):
    pass


class AlphabetMismatch(ValidationError):
    pass


class InstanceTooLarge(ValidationError):
    pass


# pipelines
class RankDeficient(ValidationError):
    pass


class EmptyTrainSet(ValidationError):
    pass


class ClassTooSmall(ValidationError):
    pass


class ZeroMeanSubcarrier(ValidationError):
    pass


class WindowTooShort(ValidationError):
    pass


class NoTags(ValidationError):
    pass


# report / io
class LengthMismatch(ValidationError):
    pass


class ConstantSeries(ValidationError):
    pass


class MissingLabelColumn(ValidationError):
    pass


class RaggedRow(ValidationError):
    pass


class NonNumericCell(ValidationError):
    def __init__(self, row, column, value=None):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(f"non-numeric cell {value!r} at row {row}, column {column!r}")


class EmptySeries(ValidationError):
    pass


class IoError(DTMIError, OSError):
    pass
