/** View state and its pure transitions. The state never stores anything the
 * API did not return: nodes and edges are kept verbatim from subgraph bodies,
 * filters and the probability slider only hide them. */

import type { EdgeRef, NodeRef, Subgraph } from "./api.js";

export const DETERMINISTIC_RELS = [
  "author",
  "category",
  "invoke",
  "library",
  "malware",
  "market",
  "upgrade",
] as const;

export const PROBABILISTIC_RELS = [
  "api_sim",
  "code_sim",
  "comp_sim",
  "file_sim",
  "lib_sim",
  "mark_sim",
  "perm_sim",
] as const;

export const ALL_RELS: readonly string[] = [...DETERMINISTIC_RELS, ...PROBABILISTIC_RELS];

export type PanelName = "piggyback" | "update-attacks" | "markets" | "signatures";

export interface ViewState {
  theta: number;
  focused: string | null; // node key
  nodes: Map<string, NodeRef>;
  edges: Map<string, EdgeRef>;
  expanded: Set<string>;
  activeRels: Set<string>;
  slider: number; // in [theta, 1]
  panel: PanelName | null;
}

export function nodeKey(node: NodeRef): string {
  return `${node.kind}:${node.id}`;
}

export function edgeKey(edge: EdgeRef): string {
  return `${edge.rel}|${edge.src_kind}:${edge.src}|${edge.dst_kind}:${edge.dst}`;
}

export function initState(theta: number): ViewState {
  return {
    theta,
    focused: null,
    nodes: new Map(),
    edges: new Map(),
    expanded: new Set(),
    activeRels: new Set(ALL_RELS),
    slider: theta,
    panel: null,
  };
}

/** Replace the view with a fresh subgraph centered on `focusKey`. */
export function focusSubgraph(state: ViewState, focusKey: string, subgraph: Subgraph): ViewState {
  const nodes = new Map(subgraph.nodes.map((n) => [nodeKey(n), n]));
  const edges = new Map(subgraph.edges.map((e) => [edgeKey(e), e]));
  return { ...state, focused: focusKey, nodes, edges, expanded: new Set([focusKey]) };
}

/** Merge a depth-1 neighborhood of `originKey` into the view. Union of node
 * sets: re-merging the same subgraph leaves the state unchanged. */
export function mergeSubgraph(state: ViewState, originKey: string, subgraph: Subgraph): ViewState {
  const nodes = new Map(state.nodes);
  for (const node of subgraph.nodes) {
    const key = nodeKey(node);
    if (!nodes.has(key)) {
      nodes.set(key, node);
    }
  }
  const edges = new Map(state.edges);
  for (const edge of subgraph.edges) {
    const key = edgeKey(edge);
    if (!edges.has(key)) {
      edges.set(key, edge);
    }
  }
  const expanded = new Set(state.expanded);
  expanded.add(originKey);
  return { ...state, nodes, edges, expanded };
}

export function setSlider(state: ViewState, value: number): ViewState {
  const clamped = Math.min(1, Math.max(state.theta, value));
  return { ...state, slider: clamped };
}

export function toggleRel(state: ViewState, rel: string): ViewState {
  const activeRels = new Set(state.activeRels);
  if (activeRels.has(rel)) {
    activeRels.delete(rel);
  } else {
    activeRels.add(rel);
  }
  return { ...state, activeRels };
}

export function openPanel(state: ViewState, panel: PanelName | null): ViewState {
  return { ...state, panel };
}

export function edgePasses(state: ViewState, edge: EdgeRef): boolean {
  if (!state.activeRels.has(edge.rel)) {
    return false;
  }
  return edge.prob === undefined || edge.prob >= state.slider;
}

/** Edges surviving the relationship filters and the probability slider. */
export function visibleEdges(state: ViewState): EdgeRef[] {
  return [...state.edges.values()].filter((e) => edgePasses(state, e));
}

export function visibleNodes(state: ViewState): NodeRef[] {
  return [...state.nodes.values()].sort((a, b) =>
    nodeKey(a) < nodeKey(b) ? -1 : nodeKey(a) > nodeKey(b) ? 1 : 0,
  );
}
