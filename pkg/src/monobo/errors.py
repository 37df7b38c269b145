"""Exception hierarchy shared by all monobo modules."""


class MonoboError(Exception):
    """Base class for every error raised by monobo."""


class DimensionError(MonoboError, ValueError):
    """Vector lengths do not match the declared dimension."""


class EmptyInputError(MonoboError, ValueError):
    """An operation that needs at least one element received none."""


class InvalidArgumentError(MonoboError, ValueError):
    """An argument is outside its permitted domain."""


class DuplicatePointError(MonoboError, ValueError):
    """Two decision vectors are identical where distinct ones are required."""


class ConditioningError(MonoboError, RuntimeError):
    """A kernel matrix could not be factorised even after nugget escalation."""


class InfeasibleGeometryError(MonoboError, ValueError):
    """An aerofoil decision vector resolves to a self-intersecting shape."""


class EvaluationError(MonoboError, RuntimeError):
    """An objective evaluation failed (missing solver, timeout, bad output)."""
