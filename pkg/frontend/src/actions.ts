/** Per-cohort action menus, derived entirely from the server's transition
 * table. The UI never hardcodes which directives a state admits. */

import type {
  CohortJson,
  DirectiveName,
  TransitionTable,
} from "./types.js";
import { DIRECTIVES } from "./types.js";

export interface MenuItem {
  kind: DirectiveName;
  enabled: boolean;
  /** Denial reason shown as a tooltip on disabled items. */
  reason?: string;
}

/** Finish targets the whole session, not a cohort, so cohort menus carry
 * the four cohort-directed directives. */
export const COHORT_DIRECTIVES: readonly DirectiveName[] = DIRECTIVES.filter(
  (d) => d !== "Finish",
);

export function actionMenu(cohort: CohortJson, table: TransitionTable): MenuItem[] {
  const row = table[cohort.state];
  return COHORT_DIRECTIVES.map((kind) => {
    const entry = row[kind];
    if (entry.allowed) {
      // The table speaks for the state machine; the one extra client-side
      // fact is idempotence of measurement error, which the server also
      // enforces per cohort.
      if (kind === "ApplyMeasurementError" && cohort.measurement_error_applied) {
        return { kind, enabled: false, reason: "measurement error already applied" };
      }
      return { kind, enabled: true };
    }
    return { kind, enabled: false, reason: entry.reason };
  });
}

export function enabledKinds(cohort: CohortJson, table: TransitionTable): DirectiveName[] {
  return actionMenu(cohort, table)
    .filter((item) => item.enabled)
    .map((item) => item.kind);
}
