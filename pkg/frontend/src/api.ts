// Thin typed client over the engine's HTTP API. The fetch function is
// injectable so tests can fake the transport; nothing here caches or
// recomputes engine state (the server stays authoritative).

import type {
  ApiErrorBody,
  EditTransaction,
  EnvResource,
  FireEvent,
  FullProtocol,
  MetaView,
  ProcessDoc,
  ProcessSummary,
  SubstituteHit,
  TraceEntry,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly body: ApiErrorBody | null;

  constructor(status: number, body: ApiErrorBody | null) {
    super(body ? `${body.code}: ${body.message}` : `HTTP ${status}`);
    this.code = body?.code ?? `HTTP_${status}`;
    this.status = status;
    this.body = body;
  }
}

/** The surface the console consumes; ApiClient is the HTTP implementation. */
export interface EngineApi {
  readonly baseUrl: string;
  listProcesses(): Promise<ProcessSummary[]>;
  getProcess(id: string): Promise<ProcessDoc>;
  getProcessProtocol(id: string): Promise<FullProtocol>;
  getEnabled(processId: string, collaborator: string): Promise<string[]>;
  fire(
    processId: string,
    collaborator: string,
    activity: string,
    payload?: Record<string, string>,
  ): Promise<FireEvent>;
  listPersons(): Promise<EnvResource[]>;
  substitutes(person: string, depth: number, processId?: string): Promise<SubstituteHit[]>;
  startMeta(processId: string, participants: Record<string, string[]>): Promise<MetaView>;
  pendingMeta(processId: string): Promise<MetaView | null>;
  metaFire(
    metaId: string,
    collaborator: string,
    activity: string,
    transaction?: EditTransaction,
  ): Promise<FireEvent>;
  concludeMeta(metaId: string): Promise<{ id: string; outcome: string; target: ProcessDoc }>;
  pollEvents(
    processId: string,
    after: number,
    waitSeconds: number,
  ): Promise<{ events: TraceEntry[]; next: number }>;
}

export class ApiClient implements EngineApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, {
        code: "UNREACHABLE",
        message: err instanceof Error ? err.message : String(err),
        ids: [],
      });
    }
    if (!response.ok) {
      let body: ApiErrorBody | null = null;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = null;
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown, collaborator?: string): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (collaborator) headers["X-Collaborator"] = collaborator;
    return this.request<T>(path, { method: "POST", headers, body: JSON.stringify(body) });
  }

  listProcesses(): Promise<ProcessSummary[]> {
    return this.request("/processes");
  }

  getProcess(id: string): Promise<ProcessDoc> {
    return this.request(`/processes/${id}`);
  }

  getProcessProtocol(id: string): Promise<FullProtocol> {
    return this.request(`/processes/${id}/protocol`);
  }

  getEnabled(processId: string, collaborator: string): Promise<string[]> {
    return this.request(
      `/processes/${processId}/enabled?collaborator=${encodeURIComponent(collaborator)}`,
    );
  }

  fire(
    processId: string,
    collaborator: string,
    activity: string,
    payload?: Record<string, string>,
  ): Promise<FireEvent> {
    return this.post(`/processes/${processId}/fire`, { activity, payload }, collaborator);
  }

  listPersons(): Promise<EnvResource[]> {
    return this.request<EnvResource[]>("/environment/resources").then((resources) =>
      resources.filter((r) => r.kind === "person"),
    );
  }

  substitutes(person: string, depth: number, processId?: string): Promise<SubstituteHit[]> {
    const query = processId ? `&process=${encodeURIComponent(processId)}` : "";
    return this.request(
      `/environment/substitutes?person=${encodeURIComponent(person)}&depth=${depth}${query}`,
    );
  }

  startMeta(processId: string, participants: Record<string, string[]>): Promise<MetaView> {
    return this.post(`/processes/${processId}/meta`, { participants });
  }

  pendingMeta(processId: string): Promise<MetaView | null> {
    return this.request<MetaView>(`/processes/${processId}/meta`).catch((err) => {
      if (err instanceof ApiError && err.status === 404) return null;
      throw err;
    });
  }

  metaFire(
    metaId: string,
    collaborator: string,
    activity: string,
    transaction?: EditTransaction,
  ): Promise<FireEvent> {
    return this.post(`/meta/${metaId}/fire`, { activity, transaction }, collaborator);
  }

  concludeMeta(metaId: string): Promise<{ id: string; outcome: string; target: ProcessDoc }> {
    return this.post(`/meta/${metaId}/conclude`, {});
  }

  pollEvents(
    processId: string,
    after: number,
    waitSeconds: number,
  ): Promise<{ events: TraceEntry[]; next: number }> {
    return this.request(`/processes/${processId}/events?after=${after}&wait=${waitSeconds}`);
  }
}
