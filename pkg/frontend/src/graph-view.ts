/** SVG rendering of the current view: focused node in the center, neighbors
 * on deterministic rings. Labels come verbatim from node ids and edge
 * probabilities; sha256 ids are shortened for display but the full id stays
 * in data-id and the tooltip. */

import type { NodeRef } from "./api.js";
import { nodeKey, visibleEdges, visibleNodes, type ViewState } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 900;
const HEIGHT = 600;

export function displayLabel(id: string): string {
  return /^[0-9a-f]{64}$/.test(id) ? id.slice(0, 10) + "…" : id;
}

function positions(state: ViewState): Map<string, { x: number; y: number }> {
  const nodes = visibleNodes(state);
  const out = new Map<string, { x: number; y: number }>();
  const cx = WIDTH / 2;
  const cy = HEIGHT / 2;
  const ring = nodes.filter((n) => nodeKey(n) !== state.focused);
  if (state.focused !== null) {
    out.set(state.focused, { x: cx, y: cy });
  }
  const perRing = 18;
  ring.forEach((node, i) => {
    const level = Math.floor(i / perRing);
    const within = ring.length - level * perRing;
    const count = Math.min(perRing, within);
    const angle = (2 * Math.PI * (i % perRing)) / count - Math.PI / 2;
    const radius = 180 + level * 110;
    out.set(nodeKey(node), {
      x: cx + radius * Math.cos(angle),
      y: cy + radius * Math.sin(angle),
    });
  });
  return out;
}

export interface GraphHandlers {
  onNodeClick: (node: NodeRef) => void;
}

export function renderGraph(svg: SVGSVGElement, state: ViewState, handlers: GraphHandlers): void {
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.replaceChildren();
  const pos = positions(state);

  for (const edge of visibleEdges(state)) {
    const a = pos.get(`${edge.src_kind}:${edge.src}`);
    const b = pos.get(`${edge.dst_kind}:${edge.dst}`);
    if (!a || !b) {
      continue;
    }
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(a.x));
    line.setAttribute("y1", String(a.y));
    line.setAttribute("x2", String(b.x));
    line.setAttribute("y2", String(b.y));
    line.setAttribute("class", `edge edge-${edge.rel}`);
    line.setAttribute("data-edge", "");
    line.setAttribute("data-rel", edge.rel);
    if (edge.prob !== undefined) {
      line.setAttribute("data-prob", String(edge.prob));
    }
    svg.appendChild(line);

    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String((a.x + b.x) / 2));
    label.setAttribute("y", String((a.y + b.y) / 2 - 4));
    label.setAttribute("class", "edge-label");
    label.textContent = edge.prob === undefined ? edge.rel : `${edge.rel} ${edge.prob}`;
    svg.appendChild(label);
  }

  for (const node of visibleNodes(state)) {
    const key = nodeKey(node);
    const p = pos.get(key)!;
    const g = document.createElementNS(SVG_NS, "g");
    g.setAttribute("transform", `translate(${p.x},${p.y})`);
    g.setAttribute("class", `node kind-${node.kind}${key === state.focused ? " focused" : ""}`);
    g.setAttribute("data-node", "");
    g.setAttribute("data-key", key);
    g.setAttribute("data-id", node.id);
    g.setAttribute("data-kind", node.kind);
    if (state.expanded.has(key)) {
      g.setAttribute("data-expanded", "");
    }

    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("r", key === state.focused ? "14" : "9");
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${node.kind} ${node.id}`;
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("y", "24");
    text.setAttribute("class", "node-label");
    text.textContent = displayLabel(node.id);

    g.append(circle, title, text);
    g.addEventListener("click", () => handlers.onNodeClick(node));
    svg.appendChild(g);
  }
}
