// Browser bootstrap: bind the controller to the page. All rendering
// goes through the pure builders in render.ts; this file only moves
// strings into the DOM and forwards clicks to controller actions.

import { ApiClient } from "./api.js";
import { Controller } from "./controller.js";
import { renderGraphSvg } from "./graph.js";
import {
  renderAdaptationConsole,
  renderCollaboratorOptions,
  renderMarkingPanel,
  renderTaskInbox,
  renderTracePanel,
} from "./render.js";

const api = new ApiClient(window.location.origin);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const controller = new Controller(api, (state) => {
  const processSelect = el<HTMLSelectElement>("process-select");
  processSelect.innerHTML =
    `<option value="">choose…</option>` +
    state.processes
      .map(
        (p) =>
          `<option value="${p.id}"${p.id === state.processId ? " selected" : ""}>${p.id} (${p.status})</option>`,
      )
      .join("");
  el<HTMLSelectElement>("collaborator-select").innerHTML = renderCollaboratorOptions(
    state.persons,
    state.collaborator,
  );
  el("inbox").innerHTML = renderTaskInbox(controller.inboxView());
  el("marking").innerHTML = renderMarkingPanel(state.doc, state.meta?.outcome === "pending");
  el("trace").innerHTML = renderTracePanel(state.doc?.trace ?? []);
  el("adaptation").innerHTML = renderAdaptationConsole(controller.adaptationView());
  el("graph").innerHTML = state.protocol
    ? renderGraphSvg(state.protocol.abstract.interaction, state.doc?.marking ?? [])
    : "";
});

el<HTMLSelectElement>("process-select").addEventListener("change", (event) => {
  const value = (event.target as HTMLSelectElement).value;
  if (value) void controller.selectProcess(value);
});

el<HTMLSelectElement>("collaborator-select").addEventListener("change", (event) => {
  void controller.selectCollaborator((event.target as HTMLSelectElement).value);
});

document.body.addEventListener("change", (event) => {
  const target = event.target as HTMLElement;
  if (target.matches("select[data-role='unavailable']")) {
    controller.setUnavailable((target as HTMLSelectElement).value);
  }
});

document.body.addEventListener("click", (event) => {
  const target = (event.target as HTMLElement).closest<HTMLElement>("[data-action]");
  if (!target) return;
  switch (target.dataset.action) {
    case "fire":
      void controller.executeActivity(target.dataset.activity ?? "");
      break;
    case "retry":
      void controller.refresh();
      break;
    case "start-adaptation":
      void controller.startAdaptation();
      break;
    case "find-substitutes":
      void controller.findSubstitutes();
      break;
    case "pick-substitute":
      void controller.pickSubstitute(target.dataset.person ?? "");
      break;
    case "accept":
      void controller.decide("accept");
      break;
    case "reject":
      void controller.decide("reject");
      break;
  }
});

void controller.init();
