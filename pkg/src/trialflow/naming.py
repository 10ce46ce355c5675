"""Constructed names for cohorts and parameters.

New names are built by concatenating fixed phrases with the outcome
word, the parameter-type word, and cohort names, so that every
parameter a user is asked about reads as plain clinical language.
"""

from __future__ import annotations

import string

from .errors import UnknownTemplate

_TEMPLATES = {
    "withdraw_yes_cohort": "patients who withdrew from therapy in {parent}",
    "withdraw_no_cohort": "patients who did not withdraw from therapy in {parent}",
    "lost_cohort": "patients lost to followup in {parent}",
    "followed_cohort": "patients followed in {parent}",
    "withdraw_mix": "withdrawal rate in {parent}",
    "loss_mix": "loss-to-followup rate in {parent}",
    "study_param": "study {outcome} {ptype} for {cohort}",
    "effective_param": "effective {outcome} {ptype} for {cohort}",
    "lost_outcome_param": "study {outcome} {ptype} for {cohort}",
    "sensitivity": "sensitivity of {outcome} measurement in {cohort}",
    "specificity": "specificity of {outcome} measurement in {cohort}",
    "population_param": "population {outcome} {ptype} for {arm} therapy",
    "baseline_param": "baseline population {outcome} {ptype}",
    "patient_param": "patient {outcome} {ptype} for {arm} therapy",
    "arm_cohort": "assigned {arm}",
    "root_cohort": "randomized patients in {trial}",
    "evidence": "evidence {seq} on {cohort}",
}


def name_for(template_kind: str, context: dict[str, object]) -> str:
    """Deterministic concatenation per the fixed template table."""
    template = _TEMPLATES.get(template_kind)
    if template is None:
        raise UnknownTemplate(f"no naming template {template_kind!r}")
    needed = {field for _, field, _, _ in string.Formatter().parse(template) if field}
    for field in needed:
        value = context.get(field)
        if value is None or value == "":
            raise UnknownTemplate(f"template {template_kind!r} needs nonempty {field!r}")
    return template.format(**{k: context[k] for k in needed})
