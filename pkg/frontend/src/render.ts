// Pure view builders: state in, HTML string out. Nothing here calls the
// API or derives engine facts; the controller passes exactly what the
// server returned, which keeps every view reconstructible from API
// responses alone.

import type {
  MetaView,
  ProcessDoc,
  SubstituteHit,
  TraceEntry,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface InboxView {
  collaborator: string | null;
  activities: string[];
  completed: boolean;
  unreachable: boolean;
  error: string | null;
}

export function renderTaskInbox(view: InboxView): string {
  if (!view.collaborator) {
    return `<p class="hint">Pick a collaborator to see their tasks.</p>`;
  }
  if (view.unreachable) {
    return `<div class="banner error" data-role="retry">API unreachable. <button data-action="retry">Retry</button></div>`;
  }
  const parts: string[] = [];
  if (view.error) {
    parts.push(`<div class="banner error">${escapeHtml(view.error)}</div>`);
  }
  if (view.completed) {
    parts.push(`<span class="badge completed">completed</span>`);
  }
  if (view.activities.length === 0) {
    parts.push(`<p class="hint">No tasks for ${escapeHtml(view.collaborator)} right now.</p>`);
  } else {
    const items = view.activities
      .map(
        (activity) =>
          `<li><button class="fire" data-action="fire" data-activity="${escapeHtml(activity)}">${escapeHtml(activity)}</button></li>`,
      )
      .join("");
    parts.push(`<ul class="inbox">${items}</ul>`);
  }
  return parts.join("");
}

export function renderMarkingPanel(doc: ProcessDoc | null, metaPending: boolean): string {
  if (!doc) return `<p class="hint">No process selected.</p>`;
  const states = doc.marking
    .map((state) => `<span class="state active">${escapeHtml(state)}</span>`)
    .join(" ");
  const banner = metaPending
    ? `<div class="banner paused" data-role="adaptation-banner">paused for adaptation</div>`
    : "";
  return `${banner}<p>status: <strong class="status-${doc.status}">${doc.status}</strong></p><p>marking: ${states || "<em>empty</em>"}</p>`;
}

export function renderTracePanel(trace: TraceEntry[]): string {
  if (trace.length === 0) return `<p class="hint">No events yet.</p>`;
  const rows = trace
    .map((entry) => {
      if (entry.kind === "fire") {
        const payload = entry.payload
          ? ` <code class="payload">${escapeHtml(JSON.stringify(entry.payload))}</code>`
          : "";
        return `<li><span class="seq">#${entry.seq}</span> ${escapeHtml(entry.collaborator)} fired <strong>${escapeHtml(entry.activity)}</strong>${payload}</li>`;
      }
      return `<li><span class="seq">#${entry.seq}</span> <em>adaptation</em> → version <code>${escapeHtml(entry.new_version.slice(0, 12))}</code></li>`;
    })
    .join("");
  return `<ol class="trace">${rows}</ol>`;
}

export function renderCollaboratorOptions(persons: string[], selected: string | null): string {
  const options = persons
    .map(
      (person) =>
        `<option value="${escapeHtml(person)}"${person === selected ? " selected" : ""}>${escapeHtml(person)}</option>`,
    )
    .join("");
  return `<option value="">choose…</option>${options}`;
}

export function renderSubstituteList(hits: SubstituteHit[]): string {
  if (hits.length === 0) return `<p class="hint">No candidates found.</p>`;
  const rows = hits
    .map(
      (hit) =>
        `<li data-person="${escapeHtml(hit.person)}">` +
        `<button data-action="pick-substitute" data-person="${escapeHtml(hit.person)}">` +
        `${escapeHtml(hit.person)}</button> <span class="distance">distance ${hit.distance}</span>` +
        ` <span class="path">${hit.path.map(escapeHtml).join(" → ")}</span></li>`,
    )
    .join("");
  return `<ol class="substitutes">${rows}</ol>`;
}

export interface AdaptationView {
  meta: MetaView | null;
  roles: string[];
  members: Record<string, string[]>;
  substitutes: SubstituteHit[] | null;
  unavailable: string | null;
  proposalSummary: string | null;
  outcome: string | null;
  error: string | null;
}

export function renderAdaptationConsole(view: AdaptationView): string {
  const parts: string[] = [];
  if (view.error) {
    parts.push(`<div class="banner error">${escapeHtml(view.error)}</div>`);
  }
  if (view.outcome) {
    parts.push(`<p>last adaptation: <strong>${escapeHtml(view.outcome)}</strong></p>`);
  }
  if (!view.meta) {
    parts.push(
      `<button data-action="start-adaptation">Start adaptation</button>` +
        `<p class="hint">Opens a propose/accept/reject deliberation and pauses the process.</p>`,
    );
    return parts.join("");
  }
  parts.push(`<p>meta-process <code>${escapeHtml(view.meta.id)}</code> deliberating</p>`);
  const unavailableOptions = view.roles
    .flatMap((role) => view.members[role] ?? [])
    .filter((member, index, arr) => arr.indexOf(member) === index)
    .map(
      (member) =>
        `<option value="${escapeHtml(member)}"${member === view.unavailable ? " selected" : ""}>${escapeHtml(member)}</option>`,
    )
    .join("");
  parts.push(
    `<div class="substitute-flow">` +
      `<label>Substitute member <select data-role="unavailable"><option value="">who is unavailable?</option>${unavailableOptions}</select></label>` +
      `<button data-action="find-substitutes">Find substitutes</button>` +
      `</div>`,
  );
  if (view.substitutes) {
    parts.push(renderSubstituteList(view.substitutes));
  }
  if (view.proposalSummary) {
    parts.push(`<p class="proposal">proposal: ${escapeHtml(view.proposalSummary)}</p>`);
  }
  parts.push(
    `<div class="decision">` +
      `<button data-action="accept"${view.proposalSummary ? "" : " disabled"}>Accept</button>` +
      `<button data-action="reject">Reject</button>` +
      `</div>`,
  );
  return parts.join("");
}
