// Session state and actions. Every fact shown in a view was fetched
// from the API; in particular the inbox is never computed locally, it
// is re-fetched whenever an event arrives or a conflict suggests the
// view is stale (the server is authoritative, optimistic updates are
// deliberately absent).

import { ApiError, type EngineApi } from "./api.js";
import { subscribe, type Subscription } from "./events.js";
import type {
  EditTransaction,
  FullProtocol,
  MetaView,
  ProcessDoc,
  ProcessSummary,
  SubstituteHit,
  TraceEntry,
} from "./types.js";
import type { AdaptationView, InboxView } from "./render.js";

export interface SessionState {
  processes: ProcessSummary[];
  persons: string[];
  processId: string | null;
  collaborator: string | null;
  doc: ProcessDoc | null;
  protocol: FullProtocol | null;
  inbox: string[];
  meta: MetaView | null;
  substitutes: SubstituteHit[] | null;
  unavailable: string | null;
  proposal: EditTransaction | null;
  proposalSummary: string | null;
  outcome: string | null;
  error: string | null;
  unreachable: boolean;
}

function emptyState(): SessionState {
  return {
    processes: [],
    persons: [],
    processId: null,
    collaborator: null,
    doc: null,
    protocol: null,
    inbox: [],
    meta: null,
    substitutes: null,
    unavailable: null,
    proposal: null,
    proposalSummary: null,
    outcome: null,
    error: null,
    unreachable: false,
  };
}

export class Controller {
  readonly state: SessionState = emptyState();
  private subscription: Subscription | null = null;

  constructor(
    private readonly api: EngineApi,
    private readonly onChange: (state: SessionState) => void = () => {},
  ) {}

  private notify(): void {
    this.onChange(this.state);
  }

  private fail(err: unknown): void {
    if (err instanceof ApiError) {
      this.state.unreachable = err.code === "UNREACHABLE";
      this.state.error = this.state.unreachable ? null : `${err.code}: ${err.message}`;
    } else {
      this.state.error = String(err);
    }
    this.notify();
  }

  async init(): Promise<void> {
    try {
      this.state.processes = await this.api.listProcesses();
      this.state.persons = (await this.api.listPersons()).map((p) => p.id);
      this.state.unreachable = false;
      this.state.error = null;
    } catch (err) {
      this.fail(err);
      return;
    }
    this.notify();
  }

  async selectProcess(processId: string): Promise<void> {
    this.subscription?.close();
    this.subscription = null;
    this.state.processId = processId;
    this.state.substitutes = null;
    this.state.proposal = null;
    this.state.proposalSummary = null;
    this.state.outcome = null;
    await this.refresh();
    const doc = this.state.doc;
    if (doc) {
      const last = doc.trace.length > 0 ? doc.trace[doc.trace.length - 1].seq : 0;
      this.subscription = subscribe(
        this.api,
        processId,
        last,
        (entry) => void this.handleTraceEntry(entry),
        () => {
          this.state.unreachable = true;
          this.notify();
        },
      );
    }
  }

  async selectCollaborator(person: string): Promise<void> {
    this.state.collaborator = person || null;
    await this.refreshInbox();
    this.notify();
  }

  /** Re-fetch everything shown for the selected process. */
  async refresh(): Promise<void> {
    const processId = this.state.processId;
    if (!processId) return;
    try {
      this.state.doc = await this.api.getProcess(processId);
      this.state.protocol = await this.api.getProcessProtocol(processId);
      this.state.meta =
        this.state.meta && this.state.meta.outcome === "pending"
          ? await this.api.pendingMeta(processId)
          : await this.api.pendingMeta(processId);
      await this.refreshInbox();
      this.state.unreachable = false;
    } catch (err) {
      this.fail(err);
      return;
    }
    this.notify();
  }

  private async refreshInbox(): Promise<void> {
    const { processId, collaborator } = this.state;
    if (!processId || !collaborator) {
      this.state.inbox = [];
      return;
    }
    try {
      this.state.inbox = await this.api.getEnabled(processId, collaborator);
      this.state.error = null;
      this.state.unreachable = false;
    } catch (err) {
      this.state.inbox = [];
      if (err instanceof ApiError && err.code === "UNKNOWN_COLLABORATOR") {
        this.state.error = `${err.code}: ${err.message}`;
        return;
      }
      throw err;
    }
  }

  async handleTraceEntry(_entry: TraceEntry): Promise<void> {
    // Server pushed a committed event: whatever we show may be stale.
    await this.refresh();
  }

  async executeActivity(activity: string, payload?: Record<string, string>): Promise<void> {
    const { processId, collaborator } = this.state;
    if (!processId || !collaborator) return;
    try {
      await this.api.fire(processId, collaborator, activity, payload);
      this.state.error = null;
      // No optimistic update: panels change when the event comes back
      // through the subscription (or an explicit refresh).
      if (!this.subscription) await this.refresh();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // Someone else fired first or the process moved on: resync,
        // then keep the machine code on screen.
        await this.refresh();
        this.state.error = `${err.code}: ${err.message}`;
        this.notify();
        return;
      }
      this.fail(err);
    }
  }

  // -- adaptation ----------------------------------------------------------

  async startAdaptation(): Promise<void> {
    const { processId, collaborator } = this.state;
    if (!processId || !collaborator) return;
    try {
      this.state.meta = await this.api.startMeta(processId, {
        initiator: [collaborator],
        decider: [collaborator],
      });
      this.state.outcome = null;
      this.state.error = null;
      await this.refresh();
    } catch (err) {
      this.fail(err);
    }
  }

  setUnavailable(person: string): void {
    this.state.unavailable = person || null;
    this.state.substitutes = null;
    this.notify();
  }

  async findSubstitutes(): Promise<void> {
    const { processId, unavailable } = this.state;
    if (!processId || !unavailable) return;
    try {
      // Rendered exactly in the order the API returns.
      this.state.substitutes = await this.api.substitutes(unavailable, 2, processId);
      this.state.error = null;
    } catch (err) {
      this.fail(err);
      return;
    }
    this.notify();
  }

  /** One-click substitution: swap the unavailable member for the pick. */
  async pickSubstitute(person: string): Promise<void> {
    const { doc, meta, collaborator, unavailable } = this.state;
    if (!doc || !meta || !collaborator || !unavailable) return;
    const edits: EditTransaction["edits"] = [];
    for (const [role, members] of Object.entries(doc.assignment)) {
      if (members.includes(unavailable)) {
        const next = members.filter((m) => m !== unavailable).concat(person).sort();
        edits.push({ op: "reassign_role", role, collaborators: next });
      }
    }
    if (edits.length === 0) {
      this.state.error = `${unavailable} holds no role in ${doc.id}`;
      this.notify();
      return;
    }
    const transaction: EditTransaction = {
      target_process_id: doc.id,
      edits,
      marking_migration: {},
    };
    try {
      await this.api.metaFire(meta.id, collaborator, "propose-change", transaction);
      this.state.proposal = transaction;
      this.state.proposalSummary = `substitute ${unavailable} with ${person}`;
      this.state.error = null;
    } catch (err) {
      this.fail(err);
      return;
    }
    this.notify();
  }

  async proposeTransaction(transaction: EditTransaction, summary: string): Promise<void> {
    const { meta, collaborator } = this.state;
    if (!meta || !collaborator) return;
    try {
      await this.api.metaFire(meta.id, collaborator, "propose-change", transaction);
      this.state.proposal = transaction;
      this.state.proposalSummary = summary;
      this.state.error = null;
    } catch (err) {
      this.fail(err);
      return;
    }
    this.notify();
  }

  async decide(decision: "accept" | "reject"): Promise<void> {
    const { meta, collaborator } = this.state;
    if (!meta || !collaborator) return;
    try {
      await this.api.metaFire(meta.id, collaborator, decision);
      const result = await this.api.concludeMeta(meta.id);
      this.state.outcome = result.outcome;
      this.state.meta = null;
      this.state.substitutes = null;
      this.state.unavailable = null;
      this.state.proposal = null;
      this.state.proposalSummary = null;
      this.state.error = null;
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError && (err.status === 422 || err.status === 409)) {
        this.state.outcome = "rejected";
        this.state.meta = null;
        this.state.error = `${err.code}: ${err.message}`;
        await this.refresh();
        return;
      }
      this.fail(err);
    }
  }

  // -- view projections ------------------------------------------------------

  inboxView(): InboxView {
    return {
      collaborator: this.state.collaborator,
      activities: this.state.inbox,
      completed: this.state.doc?.status === "completed",
      unreachable: this.state.unreachable,
      error: this.state.error,
    };
  }

  adaptationView(): AdaptationView {
    const doc = this.state.doc;
    return {
      meta: this.state.meta,
      roles: doc ? Object.keys(doc.assignment).sort() : [],
      members: doc ? doc.assignment : {},
      substitutes: this.state.substitutes,
      unavailable: this.state.unavailable,
      proposalSummary: this.state.proposalSummary,
      outcome: this.state.outcome,
      error: null,
    };
  }

  dispose(): void {
    this.subscription?.close();
    this.subscription = null;
  }
}
