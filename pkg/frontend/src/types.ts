// Interchange documents as served by the engine API.

export interface ActionDescriptor {
  action_kind: "manual" | "http-call" | "message-post";
  target: string | null;
  parameters: Record<string, string>;
}

export interface StateNode {
  id: string;
  label: string;
  is_initial: boolean;
  is_final: boolean;
}

export interface Activity {
  id: string;
  label: string;
  role: string;
  tool: string | null;
}

export interface InteractionNet {
  states: StateNode[];
  activities: Activity[];
  edges: { from: string; to: string }[];
}

export interface AbstractProtocol {
  id: string;
  network: {
    resources: { id: string; kind: string; label: string }[];
    relations: { source: string; target: string; label: string }[];
  };
  interaction: InteractionNet;
  tags: string[];
}

export interface FullProtocol {
  id: string;
  abstract: AbstractProtocol;
  resource_map: Record<string, string>;
  activity_map: Record<string, ActionDescriptor>;
}

export interface FireEvent {
  kind: "fire";
  seq: number;
  timestamp: string;
  collaborator: string;
  activity: string;
  consumed: string[];
  produced: string[];
  payload: Record<string, string> | null;
  action: ActionDescriptor | null;
}

export interface AdaptationEntry {
  kind: "adaptation";
  seq: number;
  timestamp: string;
  transaction: EditTransaction;
  prior_version: string;
  new_version: string;
  prior_assignment: Record<string, string[]>;
}

export type TraceEntry = FireEvent | AdaptationEntry;

export interface ProcessDoc {
  id: string;
  implemented_protocol_id: string;
  assignment: Record<string, string[]>;
  marking: string[];
  status: "running" | "paused" | "completed";
  trace: TraceEntry[];
}

export interface ProcessSummary {
  id: string;
  implemented_protocol_id: string;
  status: string;
  marking: string[];
}

export interface EnvResource {
  id: string;
  kind: "person" | "system";
  label: string;
  locator: string | null;
}

export interface SubstituteHit {
  person: string;
  distance: number;
  path: string[];
  labels: string[];
}

export type Edit =
  | { op: "add_state"; state: StateNode }
  | { op: "remove_state"; id: string }
  | { op: "add_activity"; activity: Activity; action: ActionDescriptor }
  | { op: "remove_activity"; id: string }
  | { op: "add_edge"; from: string; to: string }
  | { op: "remove_edge"; from: string; to: string }
  | { op: "reassign_role"; role: string; collaborators: string[] }
  | { op: "remap_activity"; activity_id: string; action: ActionDescriptor };

export interface EditTransaction {
  target_process_id: string;
  edits: Edit[];
  marking_migration: Record<string, string | null>;
}

export interface MetaView {
  id: string;
  target_process_id: string;
  outcome: "pending" | "accepted" | "rejected";
}

export interface ApiErrorBody {
  code: string;
  message: string;
  ids: string[];
  report?: { violations: { rule: string; element: string; message: string }[] };
}
