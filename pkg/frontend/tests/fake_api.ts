// Scripted stand-in for the HTTP API, mirroring the brainstorming
// fixture with lookup tables (marking -> inbox, marking -> transitions).
// No engine logic lives here; the tables are the expected behavior.

import { ApiError, type EngineApi } from "../src/api.js";
import type {
  EditTransaction,
  EnvResource,
  FireEvent,
  FullProtocol,
  MetaView,
  ProcessDoc,
  ProcessSummary,
  SubstituteHit,
  TraceEntry,
} from "../src/types.js";

type Marking = "problem-pending" | "waiting-for-ideas" | "commenting" | "closed";

const TRANSITIONS: Record<Marking, Record<string, { next: Marking; role: string }>> = {
  "problem-pending": { "present-problem": { next: "waiting-for-ideas", role: "chairman" } },
  "waiting-for-ideas": {
    "present-idea": { next: "waiting-for-ideas", role: "participant" },
    "classify-ideas": { next: "commenting", role: "chairman" },
  },
  commenting: {
    "comment-idea": { next: "commenting", role: "participant" },
    summarize: { next: "closed", role: "chairman" },
  },
  closed: {},
};

export class FakeApi implements EngineApi {
  readonly baseUrl = "http://fake";
  marking: Marking = "problem-pending";
  status: "running" | "paused" | "completed" = "running";
  assignment: Record<string, string[]> = {
    chairman: ["john"],
    participant: ["ann", "bob", "cecil"],
  };
  trace: TraceEntry[] = [];
  meta: MetaView | null = null;
  proposals: EditTransaction[] = [];
  substituteHits: SubstituteHit[] = [
    { person: "bob", distance: 1, path: ["ann", "bob"], labels: ["works_with"] },
    { person: "dan", distance: 1, path: ["ann", "dan"], labels: ["manages"] },
    { person: "cecil", distance: 2, path: ["ann", "bob", "cecil"], labels: ["w", "w"] },
  ];
  offline = false;
  decisions: string[] = [];

  private check(): void {
    if (this.offline) {
      throw new ApiError(0, { code: "UNREACHABLE", message: "connection refused", ids: [] });
    }
  }

  private roleOf(person: string): string[] {
    return Object.entries(this.assignment)
      .filter(([, members]) => members.includes(person))
      .map(([role]) => role);
  }

  async listProcesses(): Promise<ProcessSummary[]> {
    this.check();
    return [
      {
        id: "p1",
        implemented_protocol_id: "brainstorming-forum",
        status: this.status,
        marking: [this.marking],
      },
    ];
  }

  async getProcess(id: string): Promise<ProcessDoc> {
    this.check();
    if (id !== "p1") throw new ApiError(404, { code: "NOT_FOUND", message: id, ids: [id] });
    return {
      id: "p1",
      implemented_protocol_id: "brainstorming-forum",
      assignment: structuredClone(this.assignment),
      marking: [this.marking],
      status: this.status,
      trace: structuredClone(this.trace),
    };
  }

  async getProcessProtocol(): Promise<FullProtocol> {
    this.check();
    return {
      id: "brainstorming-forum",
      abstract: {
        id: "brainstorming",
        network: { resources: [], relations: [] },
        interaction: { states: [], activities: [], edges: [] },
        tags: [],
      },
      resource_map: {},
      activity_map: {},
    };
  }

  async getEnabled(_processId: string, collaborator: string): Promise<string[]> {
    this.check();
    const roles = this.roleOf(collaborator);
    if (roles.length === 0) {
      throw new ApiError(404, {
        code: "UNKNOWN_COLLABORATOR",
        message: `${collaborator} is not assigned`,
        ids: [collaborator],
      });
    }
    if (this.status !== "running") return [];
    return Object.entries(TRANSITIONS[this.marking])
      .filter(([, spec]) => roles.includes(spec.role))
      .map(([activity]) => activity)
      .sort();
  }

  async fire(
    _processId: string,
    collaborator: string,
    activity: string,
    payload?: Record<string, string>,
  ): Promise<FireEvent> {
    this.check();
    if (this.status !== "running") {
      throw new ApiError(409, {
        code: "PROCESS_NOT_RUNNING",
        message: this.status,
        ids: ["p1"],
      });
    }
    const spec = TRANSITIONS[this.marking][activity];
    if (!spec || !this.roleOf(collaborator).includes(spec.role)) {
      throw new ApiError(409, { code: "NOT_ENABLED", message: activity, ids: [activity] });
    }
    const event: FireEvent = {
      kind: "fire",
      seq: this.trace.length + 1,
      timestamp: "t",
      collaborator,
      activity,
      consumed: [this.marking],
      produced: [spec.next],
      payload: payload ?? null,
      action: null,
    };
    this.trace.push(event);
    this.marking = spec.next;
    if (this.marking === "closed") this.status = "completed";
    return event;
  }

  async listPersons(): Promise<EnvResource[]> {
    this.check();
    return ["john", "ann", "bob", "cecil", "dan"].map((id) => ({
      id,
      kind: "person" as const,
      label: id,
      locator: null,
    }));
  }

  async substitutes(): Promise<SubstituteHit[]> {
    this.check();
    return this.substituteHits;
  }

  async startMeta(processId: string): Promise<MetaView> {
    this.check();
    if (this.meta) {
      throw new ApiError(409, {
        code: "ADAPTATION_IN_PROGRESS",
        message: "busy",
        ids: [processId],
      });
    }
    this.meta = { id: "m1", target_process_id: processId, outcome: "pending" };
    this.status = "paused";
    return this.meta;
  }

  async pendingMeta(): Promise<MetaView | null> {
    this.check();
    return this.meta && this.meta.outcome === "pending" ? this.meta : null;
  }

  async metaFire(
    _metaId: string,
    _collaborator: string,
    activity: string,
    transaction?: EditTransaction,
  ): Promise<FireEvent> {
    this.check();
    if (activity === "propose-change" && transaction) this.proposals.push(transaction);
    if (activity === "accept" || activity === "reject") this.decisions.push(activity);
    return {
      kind: "fire",
      seq: 1,
      timestamp: "t",
      collaborator: _collaborator,
      activity,
      consumed: [],
      produced: [],
      payload: null,
      action: null,
    };
  }

  async concludeMeta(): Promise<{ id: string; outcome: string; target: ProcessDoc }> {
    this.check();
    const accepted =
      this.decisions[this.decisions.length - 1] === "accept" && this.proposals.length > 0;
    if (accepted) {
      const txn = this.proposals[this.proposals.length - 1];
      for (const edit of txn.edits) {
        if (edit.op === "reassign_role") this.assignment[edit.role] = edit.collaborators;
      }
    }
    this.meta = null;
    this.status = "running";
    return {
      id: "m1",
      outcome: accepted ? "accepted" : "rejected",
      target: await this.getProcess("p1"),
    };
  }

  pollEvents(): Promise<{ events: TraceEntry[]; next: number }> {
    // Unit tests push entries through the controller directly; the
    // subscription loop just parks here.
    return new Promise(() => {});
  }
}
