import itertools

import pytest

from trialflow.errors import StaleState
from trialflow.flow import init_flow
from trialflow.states import (
    TABLE,
    CohortState,
    Denial,
    DirectiveKind,
    TransitionOutcome,
    apply_transition,
)


def test_table_is_total():
    for state, kind in itertools.product(CohortState, DirectiveKind):
        outcome = TABLE.permitted(state, kind)
        assert isinstance(outcome, (TransitionOutcome, Denial))


def test_denials_carry_reasons():
    for state, kind in itertools.product(CohortState, DirectiveKind):
        outcome = TABLE.permitted(state, kind)
        if isinstance(outcome, Denial):
            assert outcome.reason


def test_lost_to_followup_evidence_denied():
    outcome = TABLE.permitted(CohortState.LOST_TO_FOLLOWUP, DirectiveKind.ATTACH_EVIDENCE)
    assert isinstance(outcome, Denial)
    assert "lost to followup" in outcome.reason


def test_active_withdraw_permitted():
    outcome = TABLE.permitted(CohortState.ACTIVE, DirectiveKind.WITHDRAW)
    assert outcome == TransitionOutcome(
        CohortState.SUBDIVIDED, (CohortState.WITHDRAWN, CohortState.ACTIVE)
    )


def test_withdrawn_evidence_permitted():
    outcome = TABLE.permitted(CohortState.WITHDRAWN, DirectiveKind.ATTACH_EVIDENCE)
    assert outcome == TransitionOutcome(CohortState.EVIDENCED)


@pytest.mark.parametrize(
    "state",
    [CohortState.SUBDIVIDED, CohortState.LOST_TO_FOLLOWUP],
)
@pytest.mark.parametrize(
    "kind",
    [k for k in DirectiveKind if k is not DirectiveKind.FINISH],
)
def test_terminal_states_deny_everything(state, kind):
    assert isinstance(TABLE.permitted(state, kind), Denial)


def test_evidenced_denies_splits():
    for kind in (DirectiveKind.WITHDRAW, DirectiveKind.LOSE_TO_FOLLOWUP):
        assert isinstance(TABLE.permitted(CohortState.EVIDENCED, kind), Denial)
    assert isinstance(
        TABLE.permitted(CohortState.EVIDENCED, DirectiveKind.ATTACH_EVIDENCE),
        TransitionOutcome,
    )


def test_json_matrix_shape():
    doc = TABLE.to_json_dict()
    assert set(doc) == {s.value for s in CohortState}
    for row in doc.values():
        assert set(row) == {k.value for k in DirectiveKind}
        for entry in row.values():
            assert entry["allowed"] or entry["reason"]


class TestApplyTransition:
    def test_states_applied_to_target_and_children(self):
        pfd = init_flow("trial", 50, 50)
        cohort = pfd.cohort_by_name("assigned experimental")
        outcome = TABLE.permitted(CohortState.ACTIVE, DirectiveKind.WITHDRAW)
        pfd.split_cohort(cohort.id, "yes", "no", 10)
        apply_transition(pfd, cohort.id, outcome, CohortState.ACTIVE)
        assert cohort.state is CohortState.SUBDIVIDED
        yes, no = cohort.children
        assert pfd.cohorts[yes].state is CohortState.WITHDRAWN
        assert pfd.cohorts[no].state is CohortState.ACTIVE

    def test_evidence_marks_evidenced(self):
        pfd = init_flow("trial", 50, 50)
        cohort = pfd.cohort_by_name("assigned control")
        outcome = TABLE.permitted(CohortState.ACTIVE, DirectiveKind.ATTACH_EVIDENCE)
        apply_transition(pfd, cohort.id, outcome, CohortState.ACTIVE)
        assert cohort.state is CohortState.EVIDENCED

    def test_stale_lookup_rejected(self):
        pfd = init_flow("trial", 50, 50)
        cohort = pfd.cohort_by_name("assigned experimental")
        outcome = TABLE.permitted(CohortState.ACTIVE, DirectiveKind.ATTACH_EVIDENCE)
        cohort.state = CohortState.SUBDIVIDED  # intervening change
        with pytest.raises(StaleState):
            apply_transition(pfd, cohort.id, outcome, CohortState.ACTIVE)
