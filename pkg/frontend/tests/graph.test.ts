import { describe, expect, it } from "vitest";

import { layerNodes, renderGraphSvg } from "../src/graph.js";
import type { InteractionNet } from "../src/types.js";

const brainstorming: InteractionNet = {
  states: [
    { id: "problem-pending", label: "Problem pending", is_initial: true, is_final: false },
    { id: "waiting-for-ideas", label: "Waiting for ideas", is_initial: false, is_final: false },
    { id: "commenting", label: "Commenting", is_initial: false, is_final: false },
    { id: "closed", label: "Closed", is_initial: false, is_final: true },
  ],
  activities: [
    { id: "present-problem", label: "Present the problem", role: "chairman", tool: null },
    { id: "present-idea", label: "Present an idea", role: "participant", tool: null },
    { id: "classify-ideas", label: "Classify the ideas", role: "chairman", tool: null },
    { id: "comment-idea", label: "Comment an idea", role: "participant", tool: null },
    { id: "summarize", label: "Summarize the session", role: "chairman", tool: null },
  ],
  edges: [
    { from: "problem-pending", to: "present-problem" },
    { from: "present-problem", to: "waiting-for-ideas" },
    { from: "waiting-for-ideas", to: "present-idea" },
    { from: "present-idea", to: "waiting-for-ideas" },
    { from: "waiting-for-ideas", to: "classify-ideas" },
    { from: "classify-ideas", to: "commenting" },
    { from: "commenting", to: "comment-idea" },
    { from: "comment-idea", to: "commenting" },
    { from: "commenting", to: "summarize" },
    { from: "summarize", to: "closed" },
  ],
};

describe("layerNodes", () => {
  it("layers by BFS depth from the initial states", () => {
    const layers = new Map(layerNodes(brainstorming).map((n) => [n.id, n.layer]));
    expect(layers.get("problem-pending")).toBe(0);
    expect(layers.get("present-problem")).toBe(1);
    expect(layers.get("waiting-for-ideas")).toBe(2);
    expect(layers.get("classify-ideas")).toBe(3);
    expect(layers.get("commenting")).toBe(4);
    expect(layers.get("summarize")).toBe(5);
    expect(layers.get("closed")).toBe(6);
  });

  it("orders nodes within a layer by id", () => {
    const placed = layerNodes(brainstorming).filter((n) => n.layer === 3);
    expect(placed.map((n) => n.id)).toEqual([...placed.map((n) => n.id)].sort());
  });

  it("places unreachable nodes after reachable ones", () => {
    const net: InteractionNet = {
      ...brainstorming,
      states: [
        ...brainstorming.states,
        { id: "island", label: "", is_initial: false, is_final: false },
      ],
    };
    const layers = new Map(layerNodes(net).map((n) => [n.id, n.layer]));
    expect(layers.get("island")).toBeGreaterThan(layers.get("closed")!);
  });
});

describe("renderGraphSvg", () => {
  it("is deterministic byte for byte", () => {
    const first = renderGraphSvg(brainstorming, ["waiting-for-ideas"]);
    const second = renderGraphSvg(
      { ...brainstorming, edges: [...brainstorming.edges].reverse() },
      ["waiting-for-ideas"],
    );
    expect(first).toBe(second);
  });

  it("highlights exactly the active states", () => {
    const svg = renderGraphSvg(brainstorming, ["commenting"]);
    expect(svg).toContain('data-node="commenting"');
    const active = svg.match(/fill="#51cf66"/g) ?? [];
    expect(active).toHaveLength(1);
  });

  it("draws a node per state and activity and escapes labels", () => {
    const net: InteractionNet = {
      states: [{ id: "s1", label: 'a "<b>" label', is_initial: true, is_final: false }],
      activities: [{ id: "a1", label: "", role: "r", tool: null }],
      edges: [{ from: "s1", to: "a1" }],
    };
    const svg = renderGraphSvg(net, []);
    expect(svg).toContain("&quot;&lt;b&gt;&quot;");
    expect((svg.match(/data-node=/g) ?? []).length).toBe(2);
  });
});
