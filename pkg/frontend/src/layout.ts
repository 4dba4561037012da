// Layered drawing positions for a diagram document. Deterministic: layer
// by longest path from the roots, order within a layer by node id.

import type { DiagramDoc } from "./types.js";

export interface NodePosition {
  id: string;
  layer: number;
  row: number;
  x: number;
  y: number;
}

export interface Edge {
  from: string;
  to: string;
  informational: boolean;
}

export interface Layout {
  positions: Map<string, NodePosition>;
  edges: Edge[];
  layerCount: number;
  rowCount: number;
}

export const LAYER_WIDTH = 170;
export const ROW_HEIGHT = 110;
export const MARGIN = 70;

export function layoutDiagram(doc: DiagramDoc): Layout {
  const depth = new Map<string, number>();
  const byId = new Map(doc.nodes.map((n) => [n.id, n]));

  const resolve = (id: string, trail: Set<string>): number => {
    const known = depth.get(id);
    if (known !== undefined) return known;
    if (trail.has(id)) throw new Error(`cycle through ${id}`);
    trail.add(id);
    const node = byId.get(id);
    const parents = node ? node.parents.filter((p) => byId.has(p)) : [];
    const d = parents.length
      ? 1 + Math.max(...parents.map((p) => resolve(p, trail)))
      : 0;
    trail.delete(id);
    depth.set(id, d);
    return d;
  };
  for (const node of doc.nodes) resolve(node.id, new Set());

  const layers = new Map<number, string[]>();
  for (const node of doc.nodes) {
    const layer = depth.get(node.id) ?? 0;
    const bucket = layers.get(layer) ?? [];
    bucket.push(node.id);
    layers.set(layer, bucket);
  }

  const positions = new Map<string, NodePosition>();
  let rowCount = 0;
  for (const [layer, ids] of [...layers.entries()].sort((a, b) => a[0] - b[0])) {
    ids.sort();
    rowCount = Math.max(rowCount, ids.length);
    ids.forEach((id, row) => {
      positions.set(id, {
        id,
        layer,
        row,
        x: MARGIN + layer * LAYER_WIDTH,
        y: MARGIN + row * ROW_HEIGHT,
      });
    });
  }

  const edges: Edge[] = [];
  for (const node of doc.nodes) {
    for (const parent of node.parents) {
      if (!byId.has(parent)) continue;
      edges.push({ from: parent, to: node.id, informational: node.kind === "decision" });
    }
  }
  edges.sort((a, b) => (a.from + ">" + a.to).localeCompare(b.from + ">" + b.to));

  return { positions, edges, layerCount: layers.size, rowCount };
}
