/** Session controller: owns the view state and routes every mutation
 * through the API client queue. No model state is constructed locally —
 * optimistic patches only retag cohort states, and every confirmed action
 * is followed by an authoritative refetch. */

import { ApiClient, ApiError } from "./api.js";
import { renderFlow } from "./flowView.js";
import {
  canSubmit,
  draftsFor,
  renderPriorForm,
  toAssignments,
  type PriorDraft,
} from "./priorForm.js";
import { renderResults } from "./resultsView.js";
import { ViewState } from "./optimistic.js";
import type {
  DirectiveName,
  InferenceReport,
  SessionSnapshot,
  TransitionTable,
} from "./types.js";

export interface UiState {
  snapshot: SessionSnapshot | null;
  drafts: PriorDraft[];
  report: InferenceReport | null;
  /** The report no longer reflects the current log. */
  reportStale: boolean;
  toast: string | null;
}

export class SessionController {
  readonly state = new ViewState<UiState>({
    snapshot: null,
    drafts: [],
    report: null,
    reportStale: false,
    toast: null,
  });

  private sessionId: string | null = null;
  private table: TransitionTable | null = null;

  constructor(private readonly api: ApiClient) {}

  get id(): string {
    if (!this.sessionId) throw new Error("no active session");
    return this.sessionId;
  }

  get transitions(): TransitionTable {
    if (!this.table) throw new Error("transition table not loaded");
    return this.table;
  }

  async start(config: Record<string, unknown>): Promise<void> {
    this.table = await this.api.transitions();
    this.sessionId = await this.api.createSession(config);
    await this.refetch();
  }

  async refetch(): Promise<void> {
    const snapshot = await this.api.snapshot(this.id);
    const prior = this.state.get();
    this.state.set({
      ...prior,
      snapshot,
      drafts: draftsFor(snapshot.pending_priors),
    });
  }

  /** Client-side gate mirroring the server's count checks, so obviously
   * malformed evidence never leaves the form. */
  evidenceValid(successes: number, trials: number): boolean {
    return (
      Number.isInteger(successes) &&
      Number.isInteger(trials) &&
      trials >= 1 &&
      successes >= 0 &&
      successes <= trials
    );
  }

  async submitDirective(
    cohortId: number,
    kind: DirectiveName,
    payload: Record<string, unknown> = {},
  ): Promise<boolean> {
    const outcome = await this.state.apply(
      (state) => this.patchCohortState(state, cohortId, kind),
      () => this.api.postDirective(this.id, { kind, target_id: cohortId, payload }),
    );
    if (!outcome.confirmed) {
      const reason =
        outcome.error instanceof ApiError ? outcome.error.reason : String(outcome.error);
      this.state.set({ ...this.state.get(), toast: reason });
      // A stale or conflicting view is repaired by refetching, never by
      // keeping the optimistic guess.
      await this.refetch();
      return false;
    }
    this.state.set({ ...this.state.get(), report: this.state.get().report, reportStale: true });
    await this.refetch();
    return true;
  }

  private patchCohortState(state: UiState, cohortId: number, kind: DirectiveName): UiState {
    if (!state.snapshot || !this.table || kind === "Finish") return state;
    const cohorts = state.snapshot.pfd.cohorts.map((cohort) => {
      if (cohort.id !== cohortId) return cohort;
      const entry = this.table![cohort.state][kind];
      return entry.allowed ? { ...cohort, state: entry.target_state } : cohort;
    });
    return {
      ...state,
      snapshot: { ...state.snapshot, pfd: { ...state.snapshot.pfd, cohorts } },
    };
  }

  async submitPriors(): Promise<boolean> {
    const drafts = this.state.get().drafts;
    if (!canSubmit(drafts)) return false;
    try {
      await this.api.postPriors(this.id, toAssignments(drafts));
    } catch (error) {
      const reason = error instanceof ApiError ? error.reason : String(error);
      this.state.set({ ...this.state.get(), toast: reason });
      return false;
    }
    this.state.set({ ...this.state.get(), reportStale: true });
    await this.refetch();
    return true;
  }

  async finishAndInfer(): Promise<InferenceReport | null> {
    const snapshot = this.state.get().snapshot;
    if (snapshot && snapshot.status !== "finished") {
      const finished = await this.submitDirective(snapshot.pfd.root, "Finish");
      if (!finished) return null;
    }
    try {
      const report = await this.api.infer(this.id);
      this.state.set({ ...this.state.get(), report, reportStale: false });
      return report;
    } catch (error) {
      const reason = error instanceof ApiError ? error.reason : String(error);
      this.state.set({ ...this.state.get(), toast: reason });
      return null;
    }
  }

  /** What-if move: revise one prior and immediately re-infer. */
  async reviseAndInfer(param: number, a: number, b: number): Promise<InferenceReport | null> {
    try {
      await this.api.postPriors(this.id, [{ param, a, b, override: true }]);
    } catch (error) {
      const reason = error instanceof ApiError ? error.reason : String(error);
      this.state.set({ ...this.state.get(), toast: reason });
      return null;
    }
    await this.refetch();
    return this.finishAndInfer();
  }

  render(): string {
    const { snapshot, drafts, report, reportStale, toast } = this.state.get();
    if (!snapshot || !this.table) return `<p class="loading">connecting…</p>`;
    const parts = [renderFlow(snapshot, this.table)];
    if (toast) parts.push(`<div class="toast">${toast}</div>`);
    if (snapshot.status === "awaiting_priors") {
      // Prior elicitation supersedes results until the shapes are in.
      parts.push(renderPriorForm(drafts));
    } else if (report) {
      parts.push(renderResults(report, reportStale));
    }
    return parts.join("\n");
  }
}
