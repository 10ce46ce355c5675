/** Patient-flow tree rendering. Markup is produced as a string so the view
 * is testable without a browser; index.html mounts it into the page. */

import { actionMenu } from "./actions.js";
import type {
  CohortJson,
  PfdJson,
  SessionSnapshot,
  TransitionTable,
} from "./types.js";

const STATE_COLORS: Record<string, string> = {
  active: "#2d7a2d",
  withdrawn: "#b07d1e",
  subdivided: "#5a5a5a",
  lost_to_followup: "#a33636",
  evidenced: "#22588f",
};

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function cohortById(pfd: PfdJson, id: number): CohortJson {
  const cohort = pfd.cohorts.find((c) => c.id === id);
  if (!cohort) throw new Error(`unknown cohort ${id}`);
  return cohort;
}

/** Leaf counts must sum to a subdivided parent's count whenever all three
 * are known; violations get highlighted rather than hidden. */
export function conservationViolations(pfd: PfdJson): number[] {
  const bad: number[] = [];
  for (const cohort of pfd.cohorts) {
    if (cohort.children.length === 0 || cohort.count === null) continue;
    const counts = cohort.children.map((id) => cohortById(pfd, id).count);
    if (counts.some((c) => c === null)) continue;
    const total = counts.reduce<number>((s, c) => s + (c as number), 0);
    if (total !== cohort.count) bad.push(cohort.id);
  }
  return bad;
}

export function badges(cohort: CohortJson): string[] {
  const out: string[] = [];
  if (cohort.state === "withdrawn" && cohort.effective_treatment === "baseline") {
    out.push("baseline care");
  }
  if (cohort.state === "lost_to_followup") out.push("no evidence possible");
  if (cohort.measurement_error_applied) out.push("fallible measurement");
  for (const ev of cohort.evidence) out.push(`${ev.successes}/${ev.trials} events`);
  return out;
}

export function renderFlow(snapshot: SessionSnapshot, table: TransitionTable): string {
  const pfd = snapshot.pfd;
  const violations = new Set(conservationViolations(pfd));

  const renderCohort = (id: number): string => {
    const cohort = cohortById(pfd, id);
    const color = STATE_COLORS[cohort.state] ?? "#000";
    const count = cohort.count === null ? "?" : String(cohort.count);
    const badgeHtml = badges(cohort)
      .map((b) => `<span class="badge">${escapeHtml(b)}</span>`)
      .join(" ");
    const menuHtml = actionMenu(cohort, table)
      .map((item) =>
        item.enabled
          ? `<button data-cohort="${cohort.id}" data-kind="${item.kind}">${item.kind}</button>`
          : `<button disabled title="${escapeHtml(item.reason ?? "")}">${item.kind}</button>`,
      )
      .join("");
    const violation = violations.has(cohort.id)
      ? ` <span class="violation">counts do not sum</span>`
      : "";
    const children = cohort.children.map(renderCohort).join("");
    return (
      `<li class="cohort state-${cohort.state}" data-id="${cohort.id}">` +
      `<span class="name" style="color:${color}">${escapeHtml(cohort.name)}</span>` +
      ` <span class="count">n=${count}</span> ${badgeHtml}${violation}` +
      `<span class="menu">${menuHtml}</span>` +
      (children ? `<ul>${children}</ul>` : "") +
      `</li>`
    );
  };

  return `<ul class="flow-tree" data-status="${snapshot.status}">${renderCohort(pfd.root)}</ul>`;
}
