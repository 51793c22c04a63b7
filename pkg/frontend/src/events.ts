// Live trace subscription: server-sent events in the browser, long-poll
// everywhere else. The handle survives transient failures by backing
// off and retrying until closed.

import type { EngineApi } from "./api.js";
import type { TraceEntry } from "./types.js";

export interface Subscription {
  close(): void;
}

export function subscribe(
  api: EngineApi,
  processId: string,
  after: number,
  onEntry: (entry: TraceEntry) => void,
  onError?: (err: unknown) => void,
): Subscription {
  if (typeof EventSource !== "undefined") {
    const source = new EventSource(
      `${api.baseUrl}/processes/${processId}/events?after=${after}&stream=true`,
    );
    source.onmessage = (message) => {
      onEntry(JSON.parse(message.data) as TraceEntry);
    };
    if (onError) source.onerror = onError;
    return { close: () => source.close() };
  }

  let cursor = after;
  let closed = false;
  const loop = async () => {
    while (!closed) {
      try {
        const batch = await api.pollEvents(processId, cursor, 20);
        for (const entry of batch.events) {
          cursor = entry.seq;
          if (!closed) onEntry(entry);
        }
      } catch (err) {
        if (onError) onError(err);
        await new Promise((resolve) => setTimeout(resolve, 500));
      }
    }
  };
  void loop();
  return {
    close: () => {
      closed = true;
    },
  };
}
