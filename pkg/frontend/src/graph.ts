// Deterministic state/activity graph rendering. Layout is topological
// layering (BFS depth from the initial states, ties broken by id), so
// the same net always produces the same SVG, byte for byte.

import type { InteractionNet } from "./types.js";

const CELL_W = 170;
const CELL_H = 64;
const PAD = 40;

interface Placed {
  id: string;
  kind: "state" | "activity";
  label: string;
  layer: number;
  row: number;
  initial: boolean;
  final: boolean;
}

export function layerNodes(net: InteractionNet): Placed[] {
  const out = new Map<string, string[]>();
  for (const edge of net.edges) {
    const targets = out.get(edge.from) ?? [];
    targets.push(edge.to);
    out.set(edge.from, targets);
  }
  const layer = new Map<string, number>();
  let frontier = net.states
    .filter((s) => s.is_initial)
    .map((s) => s.id)
    .sort();
  frontier.forEach((id) => layer.set(id, 0));
  let depth = 0;
  while (frontier.length > 0) {
    depth += 1;
    const next: string[] = [];
    for (const id of frontier) {
      for (const target of (out.get(id) ?? []).slice().sort()) {
        if (!layer.has(target)) {
          layer.set(target, depth);
          next.push(target);
        }
      }
    }
    frontier = next.sort();
  }
  const everyNode = [
    ...net.states.map((s) => ({
      id: s.id,
      kind: "state" as const,
      label: s.label || s.id,
      initial: s.is_initial,
      final: s.is_final,
    })),
    ...net.activities.map((a) => ({
      id: a.id,
      kind: "activity" as const,
      label: a.label || a.id,
      initial: false,
      final: false,
    })),
  ];
  const unreachableBase = Math.max(0, ...layer.values()) + 1;
  const placed = everyNode
    .map((node) => ({ ...node, layer: layer.get(node.id) ?? unreachableBase, row: 0 }))
    .sort((a, b) => a.layer - b.layer || a.id.localeCompare(b.id));
  const rows = new Map<number, number>();
  for (const node of placed) {
    const row = rows.get(node.layer) ?? 0;
    node.row = row;
    rows.set(node.layer, row + 1);
  }
  return placed;
}

function center(node: Placed): { x: number; y: number } {
  return { x: PAD + node.layer * CELL_W + 55, y: PAD + node.row * CELL_H + 18 };
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderGraphSvg(net: InteractionNet, marking: string[]): string {
  const placed = layerNodes(net);
  const byId = new Map(placed.map((n) => [n.id, n]));
  const active = new Set(marking);
  const width = PAD * 2 + (Math.max(0, ...placed.map((n) => n.layer)) + 1) * CELL_W;
  const height = PAD * 2 + (Math.max(0, ...placed.map((n) => n.row)) + 1) * CELL_H;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="net-graph">`,
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" markerHeight="7" orient="auto-start-reverse"><path d="M 0 0 L 10 5 L 0 10 z" fill="#888"/></marker></defs>`,
  );
  const sortedEdges = net.edges
    .slice()
    .sort((a, b) => (a.from + "->" + a.to).localeCompare(b.from + "->" + b.to));
  for (const edge of sortedEdges) {
    const from = byId.get(edge.from);
    const to = byId.get(edge.to);
    if (!from || !to) continue;
    const a = center(from);
    const b = center(to);
    parts.push(
      `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" stroke="#888" stroke-width="1.2" marker-end="url(#arrow)"/>`,
    );
  }
  for (const node of placed) {
    const { x, y } = center(node);
    const label = escapeXml(node.label);
    if (node.kind === "state") {
      const fill = active.has(node.id) ? "#51cf66" : "#2c2e33";
      parts.push(
        `<circle cx="${x}" cy="${y}" r="16" fill="${fill}" stroke="#c1c2c5" stroke-width="1.5" data-node="${node.id}"/>`,
      );
      if (node.final) {
        parts.push(
          `<circle cx="${x}" cy="${y}" r="20" fill="none" stroke="#c1c2c5" stroke-width="1"/>`,
        );
      }
      parts.push(
        `<text x="${x}" y="${y + 34}" text-anchor="middle" font-size="11" fill="#c1c2c5">${label}</text>`,
      );
    } else {
      parts.push(
        `<rect x="${x - 45}" y="${y - 13}" width="90" height="26" rx="4" fill="#1c3a5e" stroke="#c1c2c5" stroke-width="1" data-node="${node.id}"/>`,
        `<text x="${x}" y="${y + 4}" text-anchor="middle" font-size="10" fill="#e7f5ff">${label}</text>`,
      );
    }
  }
  parts.push("</svg>");
  return parts.join("");
}
