/** Wire types for the session service HTTP+JSON API. */

export type SessionStatus = "modeling" | "awaiting_priors" | "finished";

export type CohortStateName =
  | "active"
  | "withdrawn"
  | "subdivided"
  | "lost_to_followup"
  | "evidenced";

export type DirectiveName =
  | "Withdraw"
  | "LoseToFollowup"
  | "AttachEvidence"
  | "ApplyMeasurementError"
  | "Finish";

export const DIRECTIVES: readonly DirectiveName[] = [
  "Withdraw",
  "LoseToFollowup",
  "AttachEvidence",
  "ApplyMeasurementError",
  "Finish",
];

export interface EvidenceJson {
  successes: number;
  trials: number;
}

export interface CohortJson {
  id: number;
  name: string;
  parent: number | null;
  children: number[];
  assigned_treatment: string;
  effective_treatment: string;
  count: number | null;
  state: CohortStateName;
  study_param: number | null;
  effective_param: number | null;
  measurement_error_applied: boolean;
  evidence: EvidenceJson[];
}

export interface PfdJson {
  trial: string;
  root: number;
  cohorts: CohortJson[];
}

export interface ModelJson {
  version: number;
  nodes: unknown[];
}

export interface PriorRequest {
  param: number;
  name: string;
  default: [number, number];
}

export interface SessionSnapshot {
  status: SessionStatus;
  model: ModelJson;
  pfd: PfdJson;
  pending_priors: PriorRequest[];
}

/** One transition-table cell: either permitted (with resulting states) or
 * denied with a human-readable reason. */
export type TransitionEntry =
  | { allowed: true; target_state: CohortStateName; child_states?: CohortStateName[] }
  | { allowed: false; reason: string };

export type TransitionTable = Record<
  CohortStateName,
  Record<DirectiveName, TransitionEntry>
>;

export interface DirectiveRequest {
  kind: DirectiveName;
  target_id?: number;
  target_name?: string;
  payload?: Record<string, unknown>;
}

export interface DirectiveResponse {
  applied: boolean;
  created: Record<string, number>;
  prior_requests: PriorRequest[];
  status: SessionStatus;
}

export interface PriorAssignment {
  param?: number;
  param_name?: string;
  a?: number;
  b?: number;
  mean?: number;
  ess?: number;
  override?: boolean;
}

export interface ParamReport {
  name: string;
  mode: number;
  sd_logit: number;
  interval_95: [number, number];
  exact_beta: [number, number] | null;
}

export interface ExpectedUtilityReport {
  eu_experimental: number;
  eu_control: number;
  normalization_experimental: number;
  normalization_control: number;
  recommended: "experimental" | "control" | "indifferent";
}

export interface InferenceReport {
  m: number;
  n: number;
  iterations: number;
  converged: boolean;
  hessian_condition: number;
  ridge_escalations: number;
  log_posterior_at_mode: number;
  parameters: ParamReport[];
  expected_utility?: ExpectedUtilityReport;
}

export interface ApiErrorBody {
  code: "NotFound" | "Denied" | "WrongStatus" | "Invalid";
  reason: string;
}
