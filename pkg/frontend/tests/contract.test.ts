/** Contract test against the live service: for every cohort state, the
 * menu the UI derives must enable exactly the directives the server's
 * transition table permits. */

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { actionMenu, COHORT_DIRECTIVES } from "../src/actions.js";
import { startServer, type TestServer } from "./helpers.js";
import type { CohortJson, CohortStateName, TransitionTable } from "../src/types.js";

let server: TestServer;
let table: TransitionTable;

beforeAll(async () => {
  server = await startServer();
  table = await new ApiClient(server.baseUrl).transitions();
}, 60_000);

afterAll(async () => {
  await server.stop();
});

function cohortIn(state: CohortStateName): CohortJson {
  return {
    id: 1,
    name: "assigned experimental",
    parent: 0,
    children: [],
    assigned_treatment: "experimental",
    effective_treatment: "experimental",
    count: 50,
    state,
    study_param: 3,
    effective_param: 4,
    measurement_error_applied: false,
    evidence: [],
  };
}

describe("action menus mirror the exported transition table", () => {
  it("covers all five states and all five directives", () => {
    expect(Object.keys(table).sort()).toEqual([
      "active",
      "evidenced",
      "lost_to_followup",
      "subdivided",
      "withdrawn",
    ]);
    for (const row of Object.values(table)) {
      expect(Object.keys(row).sort()).toEqual([
        "ApplyMeasurementError",
        "AttachEvidence",
        "Finish",
        "LoseToFollowup",
        "Withdraw",
      ]);
    }
  });

  for (const state of [
    "active",
    "withdrawn",
    "subdivided",
    "lost_to_followup",
    "evidenced",
  ] as CohortStateName[]) {
    it(`state ${state}: enabled set equals the table's allowed set`, () => {
      const menu = actionMenu(cohortIn(state), table);
      expect(menu.map((m) => m.kind)).toEqual([...COHORT_DIRECTIVES]);
      for (const item of menu) {
        const entry = table[state][item.kind];
        expect(item.enabled).toBe(entry.allowed);
        if (!entry.allowed) {
          expect(item.reason).toBe(entry.reason);
        }
      }
    });
  }

  it("lost cohorts can never receive evidence", () => {
    const entry = table.lost_to_followup.AttachEvidence;
    expect(entry.allowed).toBe(false);
  });
});
