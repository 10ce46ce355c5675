"""Session controller: directives, construction steps, prior elicitation.

A directive pairs one patient-flow action with one statistical-model
action. The controller checks the transition table first, then runs
both actions atomically; any new parentless parameter is queued for
prior elicitation before modeling can continue.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

from .diagram import Arm, Identity, Level, MeasurementError, Mixture, Role
from .errors import (
    AlreadyApplied,
    InvalidShapes,
    NotPending,
    UnknownCohort,
    WrongStatus,
)
from .flow import PatientFlowDiagram, Treatment, init_flow
from .naming import name_for
from .states import TABLE, CohortState, Denial, DirectiveKind, apply_transition


class SessionStatus(str, Enum):
    MODELING = "modeling"
    AWAITING_PRIORS = "awaiting_priors"
    FINISHED = "finished"


@dataclass
class Directive:
    kind: DirectiveKind
    target: int
    payload: dict = field(default_factory=dict)


@dataclass
class PriorRequest:
    param: int
    constructed_name: str
    default: tuple[float, float] = (1.0, 1.0)


@dataclass
class Applied:
    prior_requests: list[PriorRequest]
    created: dict[str, int] = field(default_factory=dict)


Denied = Denial  # a denied directive is the state machine's denial, verbatim


def shapes_from_mean_ess(mean: float, ess: float) -> tuple[float, float]:
    """Beta shapes from a prior mean and equivalent sample size."""
    if not (0.0 < mean < 1.0) or ess <= 0:
        raise InvalidShapes(f"need mean in (0,1) and positive ess, got {mean}, {ess}")
    return mean * ess, (1.0 - mean) * ess


class Session:
    """One modeling conversation: a patient flow, its model, and the log."""

    def __init__(self, config: dict, pfd: PatientFlowDiagram):
        self.config = dict(config)
        self.pfd = pfd
        self.pending_priors: list[PriorRequest] = []
        self.log: list[dict] = []
        self.status = SessionStatus.MODELING

    @property
    def diagram(self):
        return self.pfd.diagram

    # ------------------------------------------------------------------

    @classmethod
    def create(cls, config: dict) -> "Session":
        """Fresh two-arm session; the three population priors are queued
        for elicitation immediately."""
        pfd = init_flow(
            config.get("trial_name", "trial"),
            config.get("exp_count"),
            config.get("ctl_count"),
            config.get("outcome_word", "mortality"),
            config.get("parameter_word", "rate"),
        )
        session = cls(config, pfd)
        session._queue_priors(pfd.diagram.pending_ids())
        return session

    def _queue_priors(self, param_ids: list[int]) -> None:
        for pid in param_ids:
            self.pending_priors.append(PriorRequest(pid, self.diagram.nodes[pid].name))
        if self.pending_priors:
            self.status = SessionStatus.AWAITING_PRIORS

    # ------------------------------------------------------------------

    def apply_directive(self, directive: Directive) -> Applied | Denied:
        if self.status is not SessionStatus.MODELING:
            raise WrongStatus(f"session is {self.status.value}, not modeling")
        cohort = self.pfd.cohort(directive.target)

        if directive.kind is DirectiveKind.FINISH:
            self.status = SessionStatus.FINISHED
            self.log.append({"kind": "Finish", "target_name": None, "payload": {}})
            return Applied([])

        outcome = TABLE.permitted(cohort.state, directive.kind)
        if isinstance(outcome, Denial):
            return outcome
        if directive.kind is DirectiveKind.APPLY_MEASUREMENT_ERROR and cohort.me_applied:
            return Denial("measurement error already modeled for this cohort")

        # Work on a copy so a failing step leaves the session untouched.
        work = copy.deepcopy(self.pfd)
        expected_state = cohort.state
        step = _STEPS[directive.kind]
        created, new_pending = step(work, directive.target, directive.payload)
        apply_transition(work, directive.target, outcome, expected_state)

        self.pfd = work
        self.log.append(
            {
                "kind": directive.kind.value,
                "target_name": cohort.name,
                "payload": dict(directive.payload),
            }
        )
        requests = [
            PriorRequest(pid, self.diagram.nodes[pid].name) for pid in new_pending
        ]
        self.pending_priors.extend(requests)
        if self.pending_priors:
            self.status = SessionStatus.AWAITING_PRIORS
        return Applied(requests, created)

    def set_priors(self, assignments: list[tuple], override: bool = False) -> SessionStatus:
        """Assign beta shapes to pending parameters.

        Each assignment is ``(param_id, a, b)``. Shapes below 1 need
        ``override`` (boundary modes break the mode search).
        """
        pending_ids = {r.param for r in self.pending_priors}
        for param_id, a, b in assignments:
            if param_id not in pending_ids:
                raise NotPending(f"parameter {param_id} is not awaiting a prior")
            if a <= 0 or b <= 0:
                raise InvalidShapes(f"shapes must be positive, got ({a}, {b})")
            if (a < 1.0 or b < 1.0) and not override:
                raise InvalidShapes(
                    f"shapes ({a}, {b}) give a boundary mode; pass override to accept"
                )
        for param_id, a, b in assignments:
            self.diagram.set_shapes(param_id, a, b, override=override)
            self.log.append(
                {
                    "kind": "SetPrior",
                    "param_name": self.diagram.nodes[param_id].name,
                    "a": a,
                    "b": b,
                }
            )
        self.pending_priors = [
            r for r in self.pending_priors if self.diagram.nodes[r.param].kind.pending
        ]
        if not self.pending_priors and self.status is SessionStatus.AWAITING_PRIORS:
            self.status = SessionStatus.MODELING
        return self.status

    # ------------------------------------------------------------------
    # log replay

    def replay_entry(self, entry: dict) -> Applied | Denied:
        if entry["kind"] == "SetPrior":
            param = self.diagram.node_by_name(entry["param_name"])
            self.set_priors([(param, entry["a"], entry["b"])], override=entry.get("override", False))
            return Applied([])
        kind = DirectiveKind(entry["kind"])
        if kind is DirectiveKind.FINISH:
            target = self.pfd.root
        else:
            target = self.pfd.cohort_by_name(entry["target_name"]).id
        return self.apply_directive(Directive(kind, target, entry.get("payload", {})))

    @classmethod
    def replay(cls, config: dict, log: list[dict]) -> "Session":
        session = cls.create(config)
        for entry in log:
            result = session.replay_entry(entry)
            if isinstance(result, Denial):
                raise WrongStatus(f"replayed directive was denied: {result.reason}")
        return session

    # ------------------------------------------------------------------

    def exports(self) -> dict[str, str]:
        """Canonical JSON exports, used for byte-level comparison."""
        return {"model": self.diagram.to_json(), "pfd": self.pfd.to_json()}


# ----------------------------------------------------------------------
# construction steps


def _mixture_split(
    pfd: PatientFlowDiagram,
    cohort_id: int,
    payload: dict,
    yes_cohort_tpl: str,
    no_cohort_tpl: str,
    mix_tpl: str,
    lost: bool,
) -> tuple[dict[str, int], list[int]]:
    """Shared structure of the withdraw and loss-to-followup steps.

    Splits the cohort, converts its study parameter from an identity
    into a mixture over the two new subcohort study parameters, and
    hangs fresh effective-level identities under the children.
    """
    cohort = pfd.cohort(cohort_id)
    d = pfd.diagram
    ctx = {"outcome": pfd.outcome_word, "ptype": pfd.parameter_word}

    yes_name = name_for(yes_cohort_tpl, {"parent": cohort.name})
    no_name = name_for(no_cohort_tpl, {"parent": cohort.name})
    yes_id, no_id = pfd.split_cohort(cohort_id, yes_name, no_name, payload.get("yes_count"))
    yes, no = pfd.cohorts[yes_id], pfd.cohorts[no_id]

    mix = d.add_chance(
        name_for(mix_tpl, {"parent": cohort.name}),
        Level.POPULATION, Role.METHODOLOGICAL, Arm.NONE, pending=True,
    )
    new_pending = [mix]

    if lost:
        # The lost cohort's outcome is unknowable: a fresh prior-only
        # chance parameter, never tied to a population parameter.
        yes_study = d.add_chance(
            name_for("lost_outcome_param", {**ctx, "cohort": yes_name}),
            Level.STUDY, Role.OUTCOME, _arm_of(yes.effective_treatment), pending=True,
        )
        new_pending.append(yes_study)
    else:
        yes.effective_treatment = Treatment.BASELINE
        yes_study = d.add_deterministic(
            name_for("study_param", {**ctx, "cohort": yes_name}),
            Level.STUDY,
            Identity(pfd.population_params[Treatment.BASELINE]),
            Role.OUTCOME, Arm.BASELINE,
        )
    no_study = d.add_deterministic(
        name_for("study_param", {**ctx, "cohort": no_name}),
        Level.STUDY,
        Identity(pfd.population_params[no.effective_treatment]),
        Role.OUTCOME, _arm_of(no.effective_treatment),
    )
    d.replace_fn(cohort.study_param, Mixture(mix, yes_study, no_study))

    yes_eff = d.add_deterministic(
        name_for("effective_param", {**ctx, "cohort": yes_name}),
        Level.EFFECTIVE, Identity(yes_study), Role.OUTCOME, _arm_of(yes.effective_treatment),
    )
    no_eff = d.add_deterministic(
        name_for("effective_param", {**ctx, "cohort": no_name}),
        Level.EFFECTIVE, Identity(no_study), Role.OUTCOME, _arm_of(no.effective_treatment),
    )
    yes.study_param, yes.effective_param = yes_study, yes_eff
    no.study_param, no.effective_param = no_study, no_eff

    created = {
        "yes_cohort": yes_id,
        "no_cohort": no_id,
        "mix_param": mix,
        "yes_study_param": yes_study,
        "no_study_param": no_study,
        "yes_effective_param": yes_eff,
        "no_effective_param": no_eff,
    }
    return created, new_pending


def _arm_of(treatment: Treatment) -> Arm:
    return {
        Treatment.EXPERIMENTAL: Arm.EXP,
        Treatment.CONTROL: Arm.CTL,
        Treatment.BASELINE: Arm.BASELINE,
    }[treatment]


def _withdraw(pfd, cohort_id, payload):
    return _mixture_split(
        pfd, cohort_id, payload,
        "withdraw_yes_cohort", "withdraw_no_cohort", "withdraw_mix", lost=False,
    )


def _lose_to_followup(pfd, cohort_id, payload):
    return _mixture_split(
        pfd, cohort_id, payload,
        "lost_cohort", "followed_cohort", "loss_mix", lost=True,
    )


def _attach_evidence(pfd, cohort_id, payload):
    record = pfd.record_evidence(cohort_id, payload["successes"], payload["trials"])
    return {"evidence_record": record}, []


def _measurement_error(pfd, cohort_id, payload):
    cohort = pfd.cohort(cohort_id)
    if cohort.me_applied:
        raise AlreadyApplied(f"measurement error already modeled for {cohort.name!r}")
    d = pfd.diagram
    ctx = {"outcome": pfd.outcome_word, "cohort": cohort.name}
    sens = d.add_chance(
        name_for("sensitivity", ctx),
        Level.POPULATION, Role.METHODOLOGICAL, Arm.NONE, pending=True,
    )
    spec = d.add_chance(
        name_for("specificity", ctx),
        Level.POPULATION, Role.METHODOLOGICAL, Arm.NONE, pending=True,
    )
    d.replace_fn(cohort.effective_param, MeasurementError(sens, spec, cohort.study_param))
    cohort.me_applied = True
    return {"sens_param": sens, "spec_param": spec}, [sens, spec]


_STEPS = {
    DirectiveKind.WITHDRAW: _withdraw,
    DirectiveKind.LOSE_TO_FOLLOWUP: _lose_to_followup,
    DirectiveKind.ATTACH_EVIDENCE: _attach_evidence,
    DirectiveKind.APPLY_MEASUREMENT_ERROR: _measurement_error,
}


# Convenience wrappers matching the individual step operations.

def withdraw_step(session: Session, cohort_id: int) -> Applied | Denied:
    return session.apply_directive(Directive(DirectiveKind.WITHDRAW, cohort_id))


def lose_to_followup_step(session: Session, cohort_id: int) -> Applied | Denied:
    return session.apply_directive(Directive(DirectiveKind.LOSE_TO_FOLLOWUP, cohort_id))


def measurement_error_step(session: Session, cohort_id: int) -> Applied | Denied:
    return session.apply_directive(
        Directive(DirectiveKind.APPLY_MEASUREMENT_ERROR, cohort_id)
    )
