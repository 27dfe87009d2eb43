/**
 * Node-link mini-map of the edges revealed so far.
 *
 * Only edges that have appeared in a proposal are drawn — full-graph
 * rendering is out of scope, and the admin only reasons about what the
 * wizard has shown.  Pure string-in/string-out so it tests without a DOM.
 */

export interface SeenEdge {
  id: number;
  src: number;
  dst: number;
}

export interface MiniMapInput {
  edges: SeenEdge[];
  removedIds: ReadonlySet<number>;
  /** Edge ids on the currently proposed path, highlighted. */
  currentIds: ReadonlySet<number>;
}

const SIZE = 260;
const RADIUS = 104;
const CENTER = SIZE / 2;

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Deterministic layout: nodes on a circle, ordered by node id. */
export function nodePositions(
  edges: readonly SeenEdge[],
): Map<number, { x: number; y: number }> {
  const ids = [...new Set(edges.flatMap((e) => [e.src, e.dst]))].sort(
    (a, b) => a - b,
  );
  const positions = new Map<number, { x: number; y: number }>();
  ids.forEach((id, index) => {
    const angle = (2 * Math.PI * index) / Math.max(ids.length, 1) - Math.PI / 2;
    positions.set(id, {
      x: Math.round((CENTER + RADIUS * Math.cos(angle)) * 10) / 10,
      y: Math.round((CENTER + RADIUS * Math.sin(angle)) * 10) / 10,
    });
  });
  return positions;
}

/** Render the mini-map as standalone SVG markup. */
export function renderMiniMap(input: MiniMapInput): string {
  const positions = nodePositions(input.edges);
  const lines: string[] = [];
  for (const edge of input.edges) {
    const a = positions.get(edge.src);
    const b = positions.get(edge.dst);
    if (a === undefined || b === undefined) continue;
    const removed = input.removedIds.has(edge.id);
    const current = input.currentIds.has(edge.id);
    const cls = removed ? "removed" : current ? "current" : "seen";
    lines.push(
      `<line class="${cls}" data-edge="${edge.id}" ` +
        `x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}"/>`,
    );
  }
  const dots: string[] = [];
  for (const [id, pos] of positions) {
    dots.push(
      `<circle class="node" data-node="${id}" cx="${pos.x}" cy="${pos.y}" r="4"/>`,
      `<text class="node-label" x="${pos.x}" y="${pos.y - 7}">` +
        `${escapeXml(String(id))}</text>`,
    );
  }
  return (
    `<svg viewBox="0 0 ${SIZE} ${SIZE}" xmlns="http://www.w3.org/2000/svg">` +
    `<g class="edges">${lines.join("")}</g>` +
    `<g class="nodes">${dots.join("")}</g>` +
    `</svg>`
  );
}
