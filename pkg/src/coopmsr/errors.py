class CoopMSRError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(CoopMSRError, ValueError):
    """Invalid code or scenario parameters."""


class FieldMismatchError(ParameterError):
    """Operands belong to different prime fields."""


class SingularMatrixError(CoopMSRError, ArithmeticError):
    """A linear system over the field has no unique solution."""


class ProtocolError(CoopMSRError, RuntimeError):
    """A repair step ran with an unsatisfied data dependency."""


class ShardFormatError(CoopMSRError, ValueError):
    """Malformed or inconsistent shard file."""
