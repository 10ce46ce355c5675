/** Prior elicitation: validation, mean/ESS conversion, and a client-side
 * beta-density preview. Authoritative shapes always come back from the
 * server; the preview only exists so the form feels immediate. */

import type { PriorAssignment, PriorRequest } from "./types.js";

export interface PriorDraft {
  request: PriorRequest;
  /** Either direct shapes or mean + equivalent sample size. */
  entryMode: "shapes" | "mean_ess";
  a?: number;
  b?: number;
  mean?: number;
  ess?: number;
}

export function draftsFor(requests: PriorRequest[]): PriorDraft[] {
  return requests.map((request) => ({
    request,
    entryMode: "shapes",
    a: request.default[0],
    b: request.default[1],
  }));
}

export function shapesOf(draft: PriorDraft): { a: number; b: number } | null {
  if (draft.entryMode === "shapes") {
    if (draft.a === undefined || draft.b === undefined) return null;
    return { a: draft.a, b: draft.b };
  }
  if (draft.mean === undefined || draft.ess === undefined) return null;
  return { a: draft.mean * draft.ess, b: (1 - draft.mean) * draft.ess };
}

export function draftValid(draft: PriorDraft): boolean {
  const shapes = shapesOf(draft);
  if (!shapes) return false;
  return (
    Number.isFinite(shapes.a) &&
    Number.isFinite(shapes.b) &&
    shapes.a > 0 &&
    shapes.b > 0
  );
}

/** Submit stays disabled until every pending request has valid shapes. */
export function canSubmit(drafts: PriorDraft[]): boolean {
  return drafts.length > 0 && drafts.every(draftValid);
}

export function toAssignments(drafts: PriorDraft[]): PriorAssignment[] {
  return drafts.map((draft) => {
    const base = { param: draft.request.param };
    if (draft.entryMode === "mean_ess") {
      return { ...base, mean: draft.mean, ess: draft.ess };
    }
    return { ...base, a: draft.a, b: draft.b };
  });
}

// ---------------------------------------------------------------------------
// beta-density preview

function logGamma(x: number): number {
  // Lanczos approximation, g = 7; plenty for a plot.
  const coefficients = [
    676.5203681218851, -1259.1392167224028, 771.32342877765313,
    -176.61502916214059, 12.507343278686905, -0.13857109526572012,
    9.9843695780195716e-6, 1.5056327351493116e-7,
  ];
  if (x < 0.5) {
    return Math.log(Math.PI / Math.sin(Math.PI * x)) - logGamma(1 - x);
  }
  x -= 1;
  let acc = 0.99999999999980993;
  for (let i = 0; i < coefficients.length; i++) {
    acc += (coefficients[i] as number) / (x + i + 1);
  }
  const t = x + coefficients.length - 0.5;
  return 0.5 * Math.log(2 * Math.PI) + (x + 0.5) * Math.log(t) - t + Math.log(acc);
}

export function betaLogDensity(theta: number, a: number, b: number): number {
  const logNorm = logGamma(a + b) - logGamma(a) - logGamma(b);
  return logNorm + (a - 1) * Math.log(theta) + (b - 1) * Math.log(1 - theta);
}

export interface DensityPreview {
  theta: number[];
  density: number[];
}

export function densityPreview(a: number, b: number, points = 101): DensityPreview {
  const theta: number[] = [];
  const density: number[] = [];
  for (let i = 1; i < points - 1; i++) {
    const t = i / (points - 1);
    theta.push(t);
    density.push(Math.exp(betaLogDensity(t, a, b)));
  }
  return { theta, density };
}

export function renderPriorForm(drafts: PriorDraft[]): string {
  const rows = drafts
    .map((draft, i) => {
      const shapes = shapesOf(draft);
      const preview = shapes && draftValid(draft)
        ? `<canvas class="density" data-a="${shapes.a}" data-b="${shapes.b}"></canvas>`
        : `<span class="invalid">enter valid shapes</span>`;
      return (
        `<fieldset data-param="${draft.request.param}">` +
        `<legend>${draft.request.name}</legend>` +
        `<input name="a-${i}" value="${draft.a ?? ""}">` +
        `<input name="b-${i}" value="${draft.b ?? ""}">` +
        preview +
        `</fieldset>`
      );
    })
    .join("");
  const disabled = canSubmit(drafts) ? "" : " disabled";
  return `<form class="priors">${rows}<button type="submit"${disabled}>Set priors</button></form>`;
}
