"""Exception types shared across the package.

Denials from the cohort-state machine are *values*, not exceptions
(see :mod:`trialflow.states`); everything here signals a caller mistake
or a numerical failure.
"""


class TrialflowError(Exception):
    """Base class for all package errors."""


class CycleDetected(TrialflowError):
    def __init__(self, node_names):
        self.node_names = list(node_names)
        super().__init__(f"dependency cycle through: {', '.join(self.node_names)}")


class MissingAssignment(TrialflowError):
    def __init__(self, node_id):
        self.node_id = node_id
        super().__init__(f"no value assigned for free parameter node {node_id}")


class ValueOutOfRange(TrialflowError):
    def __init__(self, node_id, value):
        self.node_id = node_id
        self.value = value
        super().__init__(f"value {value!r} for node {node_id} outside open interval (0, 1)")


class NotALeaf(TrialflowError):
    pass


class CountExceedsParent(TrialflowError):
    pass


class InvalidCounts(TrialflowError):
    pass


class TrialsExceedCohort(TrialflowError):
    pass


class StaleState(TrialflowError):
    pass


class WrongStatus(TrialflowError):
    pass


class UnknownCohort(TrialflowError):
    pass


class AlreadyApplied(TrialflowError):
    pass


class NotPending(TrialflowError):
    pass


class InvalidShapes(TrialflowError):
    pass


class UnknownTemplate(TrialflowError):
    pass


class PendingPriors(TrialflowError):
    pass


class EmptyModel(TrialflowError):
    pass


class BoundaryPoint(TrialflowError):
    pass


class NotConverged(TrialflowError):
    pass
