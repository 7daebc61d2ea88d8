"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for domain errors, 3 for numerical failures, 4 for parse errors.
"""


class ModelSpaceError(Exception):
    exit_code = 3


class DomainError(ModelSpaceError, ValueError):
    exit_code = 2


class PoleError(DomainError):
    pass


class OrderError(DomainError):
    pass


class MismatchError(DomainError):
    pass


class ParseError(ModelSpaceError, ValueError):
    exit_code = 4


class NumericalError(ModelSpaceError, ArithmeticError):
    exit_code = 3


class RootFindingError(NumericalError):
    pass


class ConditioningError(NumericalError):
    pass


class EigensolverError(NumericalError):
    pass


class AtomCollisionError(NumericalError):
    pass


class StructureError(NumericalError):
    pass


class RankMismatchError(StructureError):
    pass


class SpanMismatchError(NumericalError):
    pass


class FitError(NumericalError):
    pass


class NotTTOError(NumericalError):
    """Raised when an operator fails Sarason's criterion."""
