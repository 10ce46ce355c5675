import pytest

from trialflow.diagram import Evidence, Level
from trialflow.errors import (
    CountExceedsParent,
    InvalidCounts,
    NotALeaf,
    TrialsExceedCohort,
    UnknownCohort,
)
from trialflow.flow import Treatment, init_flow
from trialflow.states import CohortState


def arm(pfd, name="assigned experimental"):
    return pfd.cohort_by_name(name)


def test_init_flow_counts_sum():
    pfd = init_flow("trial", 50, 50)
    root = pfd.cohorts[pfd.root]
    assert root.count == 100
    assert [pfd.cohorts[c].count for c in root.children] == [50, 50]


def test_init_flow_without_counts():
    pfd = init_flow("trial")
    root = pfd.cohorts[pfd.root]
    assert root.count is None
    assert all(pfd.cohorts[c].count is None for c in root.children)
    assert len(root.children) == 2


def test_arm_cohort_names_and_states():
    pfd = init_flow("trial", 10, 20)
    names = {pfd.cohorts[c].name for c in pfd.cohorts[pfd.root].children}
    assert names == {"assigned experimental", "assigned control"}
    assert pfd.cohorts[pfd.root].state is CohortState.SUBDIVIDED
    assert arm(pfd).state is CohortState.ACTIVE


def test_arm_parameter_links():
    pfd = init_flow("trial", 10, 10)
    for cohort_id in pfd.cohorts[pfd.root].children:
        cohort = pfd.cohorts[cohort_id]
        assert pfd.diagram.nodes[cohort.study_param].level is Level.STUDY
        assert pfd.diagram.nodes[cohort.effective_param].level is Level.EFFECTIVE


def test_negative_arm_count_rejected():
    with pytest.raises(InvalidCounts):
        init_flow("trial", -1, 10)


class TestSplit:
    def test_counts_subtract(self):
        pfd = init_flow("trial", 50, 50)
        yes, no = pfd.split_cohort(arm(pfd).id, "yes", "no", 10)
        assert pfd.cohorts[yes].count == 10
        assert pfd.cohorts[no].count == 40

    def test_no_counts(self):
        pfd = init_flow("trial")
        yes, no = pfd.split_cohort(arm(pfd).id, "yes", "no")
        assert pfd.cohorts[yes].count is None
        assert pfd.cohorts[no].count is None

    def test_count_exceeds_parent(self):
        pfd = init_flow("trial", 50, 50)
        with pytest.raises(CountExceedsParent):
            pfd.split_cohort(arm(pfd).id, "yes", "no", 60)

    def test_not_a_leaf(self):
        pfd = init_flow("trial", 50, 50)
        with pytest.raises(NotALeaf):
            pfd.split_cohort(pfd.root, "yes", "no")

    def test_split_preserves_conservation(self):
        pfd = init_flow("trial", 50, 50)
        pfd.split_cohort(arm(pfd).id, "yes", "no", 10)
        assert pfd.conservation_check() == []


class TestEvidence:
    def test_evidence_node_parented_on_effective(self):
        pfd = init_flow("trial", 50, 50)
        cohort = arm(pfd)
        pfd.record_evidence(cohort.id, 7, 10)
        record = cohort.evidence[0]
        kind = pfd.diagram.nodes[record.node_id].kind
        assert isinstance(kind, Evidence)
        assert kind.parent == cohort.effective_param

    def test_zero_successes_ok(self):
        pfd = init_flow("trial", 50, 50)
        pfd.record_evidence(arm(pfd).id, 0, 10)
        assert arm(pfd).evidence[0].successes == 0

    def test_invalid_counts(self):
        pfd = init_flow("trial", 50, 50)
        with pytest.raises(InvalidCounts):
            pfd.record_evidence(arm(pfd).id, 11, 10)

    def test_trials_exceed_cohort(self):
        pfd = init_flow("trial", 50, 50)
        with pytest.raises(TrialsExceedCohort):
            pfd.record_evidence(arm(pfd).id, 10, 60)

    def test_evidence_on_interior_rejected(self):
        pfd = init_flow("trial", 50, 50)
        with pytest.raises(NotALeaf):
            pfd.record_evidence(pfd.root, 1, 2)


class TestConservation:
    def test_consistent(self):
        pfd = init_flow("trial", 50, 50)
        assert pfd.conservation_check() == []

    def test_violation_names_parent(self):
        pfd = init_flow("trial", 50, 50)
        pfd.cohorts[arm(pfd).id].count = 40
        (violation,) = pfd.conservation_check()
        assert "randomized patients" in violation

    def test_unset_child_count_skipped(self):
        pfd = init_flow("trial", 50, 50)
        pfd.cohorts[arm(pfd).id].count = None
        assert pfd.conservation_check() == []


def test_unknown_cohort():
    pfd = init_flow("trial")
    with pytest.raises(UnknownCohort):
        pfd.cohort(999)
    with pytest.raises(UnknownCohort):
        pfd.cohort_by_name("nobody")


def test_tree_consistency():
    pfd = init_flow("trial", 50, 50)
    pfd.split_cohort(arm(pfd).id, "yes", "no", 10)
    for cohort in pfd.cohorts.values():
        for child in cohort.children:
            assert pfd.cohorts[child].parent == cohort.id
        if cohort.parent is not None:
            assert cohort.id in pfd.cohorts[cohort.parent].children
    roots = [c for c in pfd.cohorts.values() if c.parent is None]
    assert [r.id for r in roots] == [pfd.root]


def test_json_and_dot_exports():
    pfd = init_flow("trial", 30, 30)
    doc = pfd.to_json_dict()
    assert doc["trial"] == "trial"
    assert len(doc["cohorts"]) == 3
    dot = pfd.to_dot()
    assert "assigned experimental" in dot and "n=30" in dot
