/** Posterior and expected-utility panel. */

import type { InferenceReport } from "./types.js";

function bar(lo: number, hi: number, mode: number, width = 40): string {
  const cell = (i: number) => {
    const x = i / (width - 1);
    if (Math.abs(x - mode) < 0.5 / width) return "|";
    return x >= lo && x <= hi ? "=" : "·";
  };
  return Array.from({ length: width }, (_, i) => cell(i)).join("");
}

export function renderResults(report: InferenceReport, stale = false): string {
  if (!report.converged) {
    return `<section class="results error">mode search did not converge after ${report.iterations} iterations</section>`;
  }
  const staleBadge = stale
    ? `<span class="stale">model has changed since this report</span>`
    : "";
  const rows = report.parameters
    .map((p) => {
      const [lo, hi] = p.interval_95;
      const exact = p.exact_beta
        ? ` <span class="exact">Beta(${p.exact_beta[0]}, ${p.exact_beta[1]})</span>`
        : "";
      return (
        `<tr><td>${p.name}</td>` +
        `<td><code>${bar(lo, hi, p.mode)}</code></td>` +
        `<td>${p.mode.toFixed(3)} (${lo.toFixed(3)}, ${hi.toFixed(3)})${exact}</td></tr>`
      );
    })
    .join("");
  const eu = report.expected_utility;
  const euHtml = eu
    ? `<p class="eu">` +
      `<span class="${eu.recommended === "experimental" ? "recommended" : ""}">experimental: ${eu.eu_experimental.toFixed(3)}</span> ` +
      `<span class="${eu.recommended === "control" ? "recommended" : ""}">control: ${eu.eu_control.toFixed(3)}</span> ` +
      (eu.recommended === "indifferent"
        ? `<strong>indifferent between arms</strong>`
        : `<strong>recommend ${eu.recommended}</strong>`) +
      `</p>`
    : "";
  return `<section class="results">${staleBadge}<table>${rows}</table>${euHtml}</section>`;
}
