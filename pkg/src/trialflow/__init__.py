"""trialflow: a Bayesian modeling workbench for two-arm randomized trials.

Users manipulate a patient-flow cohort tree; a transition table over
cohort knowledge states gates each directive; accepted directives run
construction steps that reshape a restricted-class influence diagram;
inference finds the posterior mode and expected utility per arm.
"""

from .diagram import (
    Arm,
    ChanceBeta,
    Deterministic,
    Evidence,
    Identity,
    InfluenceDiagram,
    Level,
    MeasurementError,
    Mixture,
    ReductionMap,
    Role,
)
from .flow import PatientFlowDiagram, Treatment, init_flow
from .inference import (
    ModeOptions,
    ModeResult,
    ReducedModel,
    UtilitySpec,
    build_reduced,
    expected_utility,
    gradient,
    inference_report,
    laplace_summaries,
    log_posterior,
    posterior_mode,
)
from .naming import name_for
from .session import (
    Applied,
    Directive,
    PriorRequest,
    Session,
    SessionStatus,
    shapes_from_mean_ess,
)
from .states import TABLE, CohortState, Denial, DirectiveKind, TransitionTable

__all__ = [
    "Applied",
    "Arm",
    "ChanceBeta",
    "CohortState",
    "Denial",
    "Deterministic",
    "Directive",
    "DirectiveKind",
    "Evidence",
    "Identity",
    "InfluenceDiagram",
    "Level",
    "MeasurementError",
    "Mixture",
    "ModeOptions",
    "ModeResult",
    "PatientFlowDiagram",
    "PriorRequest",
    "ReducedModel",
    "ReductionMap",
    "Role",
    "Session",
    "SessionStatus",
    "TABLE",
    "TransitionTable",
    "Treatment",
    "UtilitySpec",
    "build_reduced",
    "expected_utility",
    "gradient",
    "inference_report",
    "init_flow",
    "laplace_summaries",
    "log_posterior",
    "name_for",
    "posterior_mode",
    "shapes_from_mean_ess",
]
