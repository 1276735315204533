"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class NCTomoError(Exception):
    exit_code = 1


class UsageError(NCTomoError, ValueError):
    """Bad arguments, mismatched fields, malformed files."""

    exit_code = 1


class FieldMismatchError(UsageError):
    pass


class SingularMatrixError(NCTomoError, ArithmeticError):
    pass


class InvalidIdError(UsageError):
    pass


class GenerationError(NCTomoError):
    """A random network with the requested profile could not be built."""


class AssignmentError(NCTomoError):
    pass


class ModelViolationError(NCTomoError):
    """Observations are inconsistent with the assumed error model."""

    exit_code = 2


class DecodeFailure(ModelViolationError):
    pass


class UndecodableError(ModelViolationError):
    pass


class AttackImpossibleError(ModelViolationError):
    pass


class NoMatchError(ModelViolationError):
    pass


class ScaleCapError(NCTomoError):
    """An exhaustive search would exceed the configured cap."""

    exit_code = 3


class GroundTruthAccessError(NCTomoError, RuntimeError):
    pass
