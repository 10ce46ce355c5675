"""Patient-flow diagram: the cohort tree the user manipulates.

Each cohort carries a knowledge state, optional patient counts, its
treatment assignments, and links to the study- and effective-level
outcome parameters that represent it in the statistical model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .diagram import Arm, Identity, InfluenceDiagram, Level, Role
from .errors import (
    CountExceedsParent,
    InvalidCounts,
    NotALeaf,
    TrialsExceedCohort,
    UnknownCohort,
)
from .naming import name_for
from .states import CohortState


class Treatment(str, Enum):
    EXPERIMENTAL = "experimental"
    CONTROL = "control"
    BASELINE = "baseline"


_TREATMENT_ARM = {
    Treatment.EXPERIMENTAL: Arm.EXP,
    Treatment.CONTROL: Arm.CTL,
    Treatment.BASELINE: Arm.BASELINE,
}


@dataclass
class EvidenceRecord:
    id: int
    successes: int
    trials: int
    node_id: int


@dataclass
class Cohort:
    id: int
    name: str
    parent: int | None
    children: list[int]
    assigned_treatment: Treatment
    effective_treatment: Treatment
    count: int | None
    state: CohortState
    study_param: int | None
    effective_param: int | None
    me_applied: bool = False
    evidence: list[EvidenceRecord] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


class PatientFlowDiagram:
    """Cohort tree bound to the influence diagram it is linked into."""

    def __init__(
        self,
        trial_name: str,
        diagram: InfluenceDiagram,
        outcome_word: str = "mortality",
        parameter_word: str = "rate",
    ) -> None:
        self.trial_name = trial_name
        self.diagram = diagram
        self.outcome_word = outcome_word
        self.parameter_word = parameter_word
        self.cohorts: dict[int, Cohort] = {}
        self.root: int | None = None
        self._next_cohort_id = 0
        self._next_evidence_id = 0
        #: population outcome parameters keyed by treatment
        self.population_params: dict[Treatment, int] = {}

    # ------------------------------------------------------------------

    def cohort(self, cohort_id: int) -> Cohort:
        try:
            return self.cohorts[cohort_id]
        except KeyError:
            raise UnknownCohort(f"no cohort with id {cohort_id}") from None

    def cohort_by_name(self, name: str) -> Cohort:
        for cohort in self.cohorts.values():
            if cohort.name == name:
                return cohort
        raise UnknownCohort(f"no cohort named {name!r}")

    def add_cohort(
        self,
        name: str,
        parent: int | None,
        assigned: Treatment,
        effective: Treatment,
        count: int | None,
        state: CohortState,
        study_param: int | None = None,
        effective_param: int | None = None,
    ) -> int:
        cohort_id = self._next_cohort_id
        self._next_cohort_id += 1
        self.cohorts[cohort_id] = Cohort(
            cohort_id, name, parent, [], assigned, effective, count, state,
            study_param, effective_param,
        )
        if parent is not None:
            self.cohorts[parent].children.append(cohort_id)
        return cohort_id

    def split_cohort(
        self,
        cohort_id: int,
        yes_label: str,
        no_label: str,
        yes_count: int | None = None,
    ) -> tuple[int, int]:
        """Create yes/no children under a leaf cohort.

        Parameter links and child states are the caller's (the
        construction step's) responsibility.
        """
        parent = self.cohort(cohort_id)
        if not parent.is_leaf:
            raise NotALeaf(f"cohort {parent.name!r} already has children")
        no_count = None
        if yes_count is not None:
            if yes_count < 0:
                raise InvalidCounts("yes-count must be nonnegative")
            if parent.count is not None:
                if yes_count > parent.count:
                    raise CountExceedsParent(
                        f"{yes_count} exceeds the {parent.count} patients of {parent.name!r}"
                    )
                no_count = parent.count - yes_count
        yes_id = self.add_cohort(
            yes_label, cohort_id, parent.assigned_treatment, parent.effective_treatment,
            yes_count, parent.state,
        )
        no_id = self.add_cohort(
            no_label, cohort_id, parent.assigned_treatment, parent.effective_treatment,
            no_count, parent.state,
        )
        return yes_id, no_id

    def record_evidence(self, cohort_id: int, successes: int, trials: int) -> int:
        """Store binomial evidence on a leaf and mirror it into the model."""
        cohort = self.cohort(cohort_id)
        if not cohort.is_leaf:
            raise NotALeaf(f"cohort {cohort.name!r} has been subdivided")
        if trials < 1 or successes < 0 or successes > trials:
            raise InvalidCounts(f"invalid evidence counts {successes}/{trials}")
        if cohort.count is not None and trials > cohort.count:
            raise TrialsExceedCohort(
                f"{trials} observations exceed the {cohort.count} patients of {cohort.name!r}"
            )
        record_id = self._next_evidence_id
        self._next_evidence_id += 1
        node_id = self.diagram.add_evidence(
            name_for("evidence", {"seq": record_id, "cohort": cohort.name}),
            cohort.effective_param,
            successes,
            trials,
        )
        cohort.evidence.append(EvidenceRecord(record_id, successes, trials, node_id))
        return record_id

    def conservation_check(self) -> list[str]:
        """Interior cohorts whose fully specified children break the sum rule."""
        violations = []
        for cohort in self.cohorts.values():
            if cohort.is_leaf or cohort.count is None:
                continue
            counts = [self.cohorts[c].count for c in cohort.children]
            if any(c is None for c in counts):
                continue
            if sum(counts) != cohort.count:
                violations.append(
                    f"children of {cohort.name!r} sum to {sum(counts)}, not {cohort.count}"
                )
        return violations

    # ------------------------------------------------------------------

    def to_json_dict(self) -> dict:
        cohorts = []
        for cohort in self.cohorts.values():
            cohorts.append(
                {
                    "id": cohort.id,
                    "name": cohort.name,
                    "parent": cohort.parent,
                    "children": list(cohort.children),
                    "assigned_treatment": cohort.assigned_treatment.value,
                    "effective_treatment": cohort.effective_treatment.value,
                    "count": cohort.count,
                    "state": cohort.state.value,
                    "study_param": cohort.study_param,
                    "effective_param": cohort.effective_param,
                    "measurement_error_applied": cohort.me_applied,
                    "evidence": [
                        {
                            "id": r.id,
                            "successes": r.successes,
                            "trials": r.trials,
                            "node_id": r.node_id,
                        }
                        for r in cohort.evidence
                    ],
                }
            )
        return {"trial": self.trial_name, "root": self.root, "cohorts": cohorts}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    def to_dot(self) -> str:
        lines = ["digraph cohorts {", "  rankdir=TB;"]
        for cohort in self.cohorts.values():
            label = cohort.name
            if cohort.count is not None:
                label += f"\\nn={cohort.count}"
            label += f"\\n[{cohort.state.value}]"
            lines.append(f'  c{cohort.id} [shape=box, label="{label}"];')
        for cohort in self.cohorts.values():
            for child in cohort.children:
                lines.append(f"  c{cohort.id} -> c{child};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_initial_diagram(
    outcome_word: str = "mortality", parameter_word: str = "rate"
) -> tuple[InfluenceDiagram, dict]:
    """The starting two-arm model: three population chance nodes, and
    identity study/effective/patient parameters per arm.

    Returns the diagram and a map of the created node ids.
    """
    d = InfluenceDiagram()
    ctx = {"outcome": outcome_word, "ptype": parameter_word}
    ids: dict[str, int] = {}
    ids["pop_exp"] = d.add_chance(
        name_for("population_param", {**ctx, "arm": "experimental"}),
        Level.POPULATION, Role.OUTCOME, Arm.EXP, pending=True,
    )
    ids["pop_ctl"] = d.add_chance(
        name_for("population_param", {**ctx, "arm": "control"}),
        Level.POPULATION, Role.OUTCOME, Arm.CTL, pending=True,
    )
    ids["pop_baseline"] = d.add_chance(
        name_for("baseline_param", ctx),
        Level.POPULATION, Role.OUTCOME, Arm.BASELINE, pending=True,
    )
    for arm_key, arm, arm_word in (
        ("exp", Arm.EXP, "experimental"),
        ("ctl", Arm.CTL, "control"),
    ):
        cohort_name = name_for("arm_cohort", {"arm": arm_word})
        study = d.add_deterministic(
            name_for("study_param", {**ctx, "cohort": cohort_name}),
            Level.STUDY, Identity(ids[f"pop_{arm_key}"]), Role.OUTCOME, arm,
        )
        effective = d.add_deterministic(
            name_for("effective_param", {**ctx, "cohort": cohort_name}),
            Level.EFFECTIVE, Identity(study), Role.OUTCOME, arm,
        )
        patient = d.add_deterministic(
            name_for("patient_param", {**ctx, "arm": arm_word}),
            Level.PATIENT, Identity(ids[f"pop_{arm_key}"]), Role.OUTCOME, arm,
        )
        ids[f"study_{arm_key}"] = study
        ids[f"effective_{arm_key}"] = effective
        ids[f"patient_{arm_key}"] = patient
    return d, ids


def init_flow(
    trial_name: str,
    exp_count: int | None = None,
    ctl_count: int | None = None,
    outcome_word: str = "mortality",
    parameter_word: str = "rate",
) -> PatientFlowDiagram:
    """Fresh two-arm trial: root plus the two assigned-treatment arms,
    linked into a newly built initial influence diagram."""
    for count in (exp_count, ctl_count):
        if count is not None and count < 0:
            raise InvalidCounts("arm counts must be nonnegative")
    diagram, ids = build_initial_diagram(outcome_word, parameter_word)
    pfd = PatientFlowDiagram(trial_name, diagram, outcome_word, parameter_word)
    pfd.population_params = {
        Treatment.EXPERIMENTAL: ids["pop_exp"],
        Treatment.CONTROL: ids["pop_ctl"],
        Treatment.BASELINE: ids["pop_baseline"],
    }
    total = None
    if exp_count is not None and ctl_count is not None:
        total = exp_count + ctl_count
    root = pfd.add_cohort(
        name_for("root_cohort", {"trial": trial_name}),
        None, Treatment.EXPERIMENTAL, Treatment.EXPERIMENTAL, total,
        CohortState.SUBDIVIDED,
    )
    pfd.root = root
    for treatment, count, arm_word in (
        (Treatment.EXPERIMENTAL, exp_count, "experimental"),
        (Treatment.CONTROL, ctl_count, "control"),
    ):
        key = "exp" if treatment is Treatment.EXPERIMENTAL else "ctl"
        pfd.add_cohort(
            name_for("arm_cohort", {"arm": arm_word}),
            root, treatment, treatment, count, CohortState.ACTIVE,
            study_param=ids[f"study_{key}"],
            effective_param=ids[f"effective_{key}"],
        )
    return pfd
