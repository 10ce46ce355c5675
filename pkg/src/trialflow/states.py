"""Cohort knowledge states and the directive transition table.

The table decides, before anything is mutated, whether a user directive
is allowed for a cohort in its current state. Denials are ordinary
return values carrying a user-readable reason, never exceptions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .errors import StaleState


class CohortState(str, Enum):
    ACTIVE = "active"
    WITHDRAWN = "withdrawn"
    SUBDIVIDED = "subdivided"
    LOST_TO_FOLLOWUP = "lost_to_followup"
    EVIDENCED = "evidenced"


class DirectiveKind(str, Enum):
    WITHDRAW = "Withdraw"
    LOSE_TO_FOLLOWUP = "LoseToFollowup"
    ATTACH_EVIDENCE = "AttachEvidence"
    APPLY_MEASUREMENT_ERROR = "ApplyMeasurementError"
    FINISH = "Finish"


@dataclass(frozen=True)
class TransitionOutcome:
    """Resulting states for the target and any created children."""

    target_state: CohortState
    child_states: tuple[CohortState, CohortState] | None = None


@dataclass(frozen=True)
class Denial:
    reason: str


_LEAF_ONLY = "directives apply to leaf cohorts; this cohort has been subdivided"
_LOST = "no outcome data can exist for patients lost to followup"


def _build_table() -> dict[tuple[CohortState, DirectiveKind], TransitionOutcome | Denial]:
    S, D = CohortState, DirectiveKind
    table: dict[tuple[CohortState, DirectiveKind], TransitionOutcome | Denial] = {}

    table[(S.ACTIVE, D.WITHDRAW)] = TransitionOutcome(
        S.SUBDIVIDED, (S.WITHDRAWN, S.ACTIVE)
    )
    table[(S.ACTIVE, D.LOSE_TO_FOLLOWUP)] = TransitionOutcome(
        S.SUBDIVIDED, (S.LOST_TO_FOLLOWUP, S.ACTIVE)
    )
    table[(S.ACTIVE, D.ATTACH_EVIDENCE)] = TransitionOutcome(S.EVIDENCED)
    table[(S.ACTIVE, D.APPLY_MEASUREMENT_ERROR)] = TransitionOutcome(S.ACTIVE)

    # Withdrawn patients have known outcomes, so evidence and further
    # subdivision by followup loss remain available.
    table[(S.WITHDRAWN, D.ATTACH_EVIDENCE)] = TransitionOutcome(S.EVIDENCED)
    table[(S.WITHDRAWN, D.LOSE_TO_FOLLOWUP)] = TransitionOutcome(
        S.SUBDIVIDED, (S.LOST_TO_FOLLOWUP, S.WITHDRAWN)
    )
    table[(S.WITHDRAWN, D.WITHDRAW)] = Denial("cohort has already withdrawn from therapy")
    table[(S.WITHDRAWN, D.APPLY_MEASUREMENT_ERROR)] = TransitionOutcome(S.WITHDRAWN)

    table[(S.EVIDENCED, D.ATTACH_EVIDENCE)] = TransitionOutcome(S.EVIDENCED)
    for kind in (D.WITHDRAW, D.LOSE_TO_FOLLOWUP):
        table[(S.EVIDENCED, kind)] = Denial(
            "evidence already attached; splitting the cohort would orphan it"
        )
    table[(S.EVIDENCED, D.APPLY_MEASUREMENT_ERROR)] = Denial(
        "evidence already attached; the measurement model is fixed"
    )

    for kind in (D.WITHDRAW, D.LOSE_TO_FOLLOWUP, D.APPLY_MEASUREMENT_ERROR):
        table[(S.SUBDIVIDED, kind)] = Denial(_LEAF_ONLY)
        table[(S.LOST_TO_FOLLOWUP, kind)] = Denial(_LOST)
    table[(S.SUBDIVIDED, D.ATTACH_EVIDENCE)] = Denial(_LEAF_ONLY)
    table[(S.LOST_TO_FOLLOWUP, D.ATTACH_EVIDENCE)] = Denial(_LOST)

    # Finishing is a session-level directive; it never touches a cohort.
    for state in S:
        table[(state, D.FINISH)] = TransitionOutcome(state)
    return table


class TransitionTable:
    """Immutable lookup of permitted directives per cohort state."""

    def __init__(self) -> None:
        self._table = _build_table()

    def permitted(self, state: CohortState, kind: DirectiveKind) -> TransitionOutcome | Denial:
        return self._table[(state, kind)]

    def allows(self, state: CohortState, kind: DirectiveKind) -> bool:
        return isinstance(self._table[(state, kind)], TransitionOutcome)

    def to_json_dict(self) -> dict:
        """Matrix form for documentation and for UI graying-out."""
        out: dict[str, dict[str, dict]] = {}
        for (state, kind), outcome in self._table.items():
            row = out.setdefault(state.value, {})
            if isinstance(outcome, Denial):
                row[kind.value] = {"allowed": False, "reason": outcome.reason}
            else:
                entry: dict = {"allowed": True, "target_state": outcome.target_state.value}
                if outcome.child_states is not None:
                    entry["child_states"] = [s.value for s in outcome.child_states]
                row[kind.value] = entry
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))


TABLE = TransitionTable()


def apply_transition(pfd, cohort_id: int, outcome: TransitionOutcome, expected_state: CohortState) -> None:
    """Apply the state changes of a permitted outcome to a cohort.

    ``expected_state`` is the state the lookup was made against; if the
    cohort has moved on since, the outcome is stale.
    """
    cohort = pfd.cohorts[cohort_id]
    if cohort.state is not expected_state:
        raise StaleState(
            f"cohort {cohort.name!r} is now {cohort.state.value}, not {expected_state.value}"
        )
    cohort.state = outcome.target_state
    if outcome.child_states is not None:
        children = cohort.children[-2:]
        if len(children) != 2:
            raise StaleState(f"cohort {cohort.name!r} has no freshly created children")
        for child_id, state in zip(children, outcome.child_states):
            pfd.cohorts[child_id].state = state
