/** Browser bootstrap: mounts the controller into #app and wires events.
 * All rendering logic lives in the imported modules so it stays testable
 * in node. */

import { ApiClient } from "./api.js";
import { SessionController } from "./controller.js";

const DEFAULT_BASE = "http://127.0.0.1:8711";

export function mount(root: HTMLElement, baseUrl: string = DEFAULT_BASE): SessionController {
  const controller = new SessionController(new ApiClient(baseUrl));
  controller.state.subscribe(() => {
    root.innerHTML = controller.render();
  });

  root.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const kind = target.dataset["kind"];
    const cohort = target.dataset["cohort"];
    if (!kind || !cohort) return;
    const payload: Record<string, unknown> = {};
    if (kind === "AttachEvidence") {
      const successes = Number(window.prompt("events observed?"));
      const trials = Number(window.prompt("patients observed?"));
      if (!controller.evidenceValid(successes, trials)) {
        window.alert("events must be integers with 0 <= events <= patients");
        return;
      }
      payload["successes"] = successes;
      payload["trials"] = trials;
    }
    void controller.submitDirective(Number(cohort), kind as never, payload);
  });

  root.addEventListener("submit", (event) => {
    const form = event.target as HTMLFormElement;
    if (!form.classList.contains("priors")) return;
    event.preventDefault();
    const drafts = controller.state.get().drafts;
    for (const [i, draft] of drafts.entries()) {
      draft.entryMode = "shapes";
      draft.a = Number(new FormData(form).get(`a-${i}`));
      draft.b = Number(new FormData(form).get(`b-${i}`));
    }
    void controller.submitPriors();
  });

  void controller.start({
    trial_name: "browser session",
    exp_count: 50,
    ctl_count: 50,
  });
  return controller;
}

declare global {
  interface Window {
    trialflowMount?: typeof mount;
  }
}

if (typeof window !== "undefined") {
  window.trialflowMount = mount;
  const root = document.getElementById("app");
  if (root) mount(root);
}
