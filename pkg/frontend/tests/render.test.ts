import { describe, expect, it } from "vitest";

import {
  renderAdaptationConsole,
  renderMarkingPanel,
  renderSubstituteList,
  renderTaskInbox,
  renderTracePanel,
} from "../src/render.js";
import type { ProcessDoc, SubstituteHit } from "../src/types.js";

const baseInbox = {
  collaborator: "ann",
  activities: [] as string[],
  completed: false,
  unreachable: false,
  error: null as string | null,
};

describe("renderTaskInbox", () => {
  it("renders one fire button per enabled activity, in API order", () => {
    const html = renderTaskInbox({ ...baseInbox, activities: ["present-idea", "comment-idea"] });
    const order = [...html.matchAll(/data-activity="([^"]+)"/g)].map((m) => m[1]);
    expect(order).toEqual(["present-idea", "comment-idea"]);
  });

  it("shows a completed badge with an empty inbox", () => {
    const html = renderTaskInbox({ ...baseInbox, completed: true });
    expect(html).toContain("completed");
    expect(html).not.toContain("data-action=\"fire\"");
  });

  it("replaces the inbox with a retry banner when unreachable", () => {
    const html = renderTaskInbox({ ...baseInbox, unreachable: true });
    expect(html).toContain('data-action="retry"');
    expect(html).not.toContain("<ul");
  });

  it("surfaces API errors inline with their machine code", () => {
    const html = renderTaskInbox({ ...baseInbox, error: "NOT_ENABLED: inactive input states" });
    expect(html).toContain("NOT_ENABLED");
  });

  it("escapes markup in activity ids", () => {
    const html = renderTaskInbox({ ...baseInbox, activities: ['<img src="x">'] });
    expect(html).not.toContain("<img");
  });
});

describe("renderMarkingPanel", () => {
  const doc: ProcessDoc = {
    id: "p1",
    implemented_protocol_id: "x",
    assignment: { chairman: ["john"] },
    marking: ["waiting-for-ideas"],
    status: "paused",
    trace: [],
  };

  it("shows status and active states", () => {
    const html = renderMarkingPanel(doc, false);
    expect(html).toContain("paused");
    expect(html).toContain("waiting-for-ideas");
  });

  it("shows the adaptation banner while a meta-process is pending", () => {
    expect(renderMarkingPanel(doc, true)).toContain("paused for adaptation");
    expect(renderMarkingPanel(doc, false)).not.toContain("paused for adaptation");
  });
});

describe("renderTracePanel", () => {
  it("renders fire events with payloads and adaptation boundaries", () => {
    const html = renderTracePanel([
      {
        kind: "fire",
        seq: 1,
        timestamp: "t",
        collaborator: "ann",
        activity: "present-idea",
        consumed: [],
        produced: [],
        payload: { idea: "garden" },
        action: null,
      },
      {
        kind: "adaptation",
        seq: 2,
        timestamp: "t",
        transaction: { target_process_id: "p1", edits: [], marking_migration: {} },
        prior_version: "a".repeat(64),
        new_version: "b".repeat(64),
        prior_assignment: {},
      },
    ]);
    expect(html).toContain("present-idea");
    expect(html).toContain("garden");
    expect(html).toContain("adaptation");
    expect(html).toContain("b".repeat(12));
  });
});

describe("renderSubstituteList", () => {
  it("keeps the exact order given", () => {
    const hits: SubstituteHit[] = [
      { person: "bob", distance: 1, path: ["ann", "bob"], labels: ["works_with"] },
      { person: "dan", distance: 1, path: ["ann", "dan"], labels: ["manages"] },
      { person: "cecil", distance: 2, path: ["ann", "bob", "cecil"], labels: ["w", "w"] },
    ];
    const html = renderSubstituteList(hits);
    const order = [...html.matchAll(/data-person="([^"]+)"/g)].map((m) => m[1]);
    // one data-person on the <li>, one on the button
    expect(order).toEqual(["bob", "bob", "dan", "dan", "cecil", "cecil"]);
  });
});

describe("renderAdaptationConsole", () => {
  const base = {
    meta: null,
    roles: ["chairman", "participant"],
    members: { chairman: ["john"], participant: ["ann", "bob"] },
    substitutes: null,
    unavailable: null,
    proposalSummary: null,
    outcome: null,
    error: null,
  };

  it("offers to start when no meta-process is pending", () => {
    expect(renderAdaptationConsole(base)).toContain('data-action="start-adaptation"');
  });

  it("disables accept until a proposal exists", () => {
    const pending = {
      ...base,
      meta: { id: "m1", target_process_id: "p1", outcome: "pending" as const },
    };
    expect(renderAdaptationConsole(pending)).toContain('data-action="accept" disabled');
    const withProposal = { ...pending, proposalSummary: "substitute ann with dan" };
    const html = renderAdaptationConsole(withProposal);
    expect(html).toContain('data-action="accept"');
    expect(html).not.toContain('data-action="accept" disabled');
    expect(html).toContain("substitute ann with dan");
  });

  it("lists assigned members as substitution targets", () => {
    const pending = {
      ...base,
      meta: { id: "m1", target_process_id: "p1", outcome: "pending" as const },
    };
    const html = renderAdaptationConsole(pending);
    for (const member of ["john", "ann", "bob"]) {
      expect(html).toContain(`<option value="${member}"`);
    }
  });
});
