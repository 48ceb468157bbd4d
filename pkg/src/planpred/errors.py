"""Exception hierarchy.

Domain errors (exit status 1 on the command line) derive from
:class:`PlanPredError`; malformed input files raise :class:`TaskFormatError`,
which the CLI maps to exit status 2.
"""


class PlanPredError(Exception):
    """Base class for all domain errors."""


class UnknownPartError(PlanPredError, KeyError):
    pass


class InfeasibleError(PlanPredError):
    """No plan (or no candidate) is consistent with the observation."""


class GenerationError(PlanPredError):
    def __init__(self, message, attempts=0):
        super().__init__(message)
        self.attempts = attempts


class IncompleteRecordError(PlanPredError):
    pass


class DegenerateVectorError(PlanPredError, ValueError):
    pass


class OrderingError(PlanPredError, ValueError):
    pass


class TaskFormatError(ValueError):
    """A task or participant file could not be parsed."""
