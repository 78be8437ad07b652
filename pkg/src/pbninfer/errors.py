"""Exception hierarchy.

Every error raised by the library derives from :class:`PbnError`. The CLI
maps the three intermediate classes onto exit codes: :class:`UsageError`
(1), :class:`DataError` (2) and :class:`NumericError` (3).
"""


class PbnError(Exception):
    pass


class UsageError(PbnError, ValueError):
    """A parameter lies outside an operation's preconditions."""


class DataError(PbnError, ValueError):
    """Input data is malformed or unusable."""


class NumericError(PbnError, ArithmeticError):
    """A numerical procedure failed to converge."""


# ingest
class EmptyInput(DataError):
    pass


class MalformedRow(DataError):
    pass


class NonNumericValue(DataError):
    pass


class MissingValue(DataError):
    pass


class NegativeValue(DataError):
    pass


class DuplicateGeneId(DataError):
    pass


class UnknownGeneId(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


# discretize
class DegenerateRow(DataError):
    pass


# cod / infer
class DimensionMismatch(DataError):
    pass


class ConstantTarget(DataError):
    pass


class KTooLarge(UsageError):
    pass


class EmptyPredictorList(DataError):
    pass


# pbn / ssd
class OddRecordLength(UsageError):
    pass


class LengthMismatch(DataError):
    pass


class TooFewSamples(UsageError):
    pass


class EmptyHistogram(DataError):
    pass


# oracle
class NetworkTooLarge(UsageError):
    pass


class NotConverged(NumericError):
    pass
