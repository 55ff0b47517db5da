/** Fact panels: tabular views over the fact endpoints. Every cell is one
 * response field; rows are clickable to focus the involved app. */

import type {
  FamilySignature,
  MarketReplicationFact,
  PiggybackFact,
  UpdateAttackFact,
} from "./api.js";
import { displayLabel } from "./graph-view.js";

export interface PanelHandlers {
  onFocusApp: (sha256: string) => void;
}

function table(headers: string[]): { table: HTMLTableElement; body: HTMLTableSectionElement } {
  const el = document.createElement("table");
  el.setAttribute("data-role", "facts");
  const head = el.createTHead().insertRow();
  for (const h of headers) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  return { table: el, body: el.createTBody() };
}

function cell(row: HTMLTableRowElement, field: string, value: string, fullValue?: string): void {
  const td = row.insertCell();
  td.setAttribute("data-field", field);
  td.textContent = value;
  if (fullValue !== undefined) {
    td.setAttribute("title", fullValue);
  }
}

function emptyState(container: HTMLElement): void {
  const p = document.createElement("p");
  p.setAttribute("data-role", "empty-state");
  p.textContent = "nothing here";
  container.appendChild(p);
}

export function renderPiggyback(
  container: HTMLElement,
  facts: PiggybackFact[],
  handlers: PanelHandlers,
): void {
  container.replaceChildren();
  if (facts.length === 0) {
    return emptyState(container);
  }
  const { table: el, body } = table(["package", "version", "original", "variant", "code_sim"]);
  for (const fact of facts) {
    const row = body.insertRow();
    row.setAttribute("data-row", "piggyback");
    cell(row, "package_name", fact.package_name);
    cell(row, "version_code", String(fact.version_code));
    cell(row, "original", displayLabel(fact.original), fact.original);
    cell(row, "variant", displayLabel(fact.variant), fact.variant);
    cell(row, "code_sim", fact.code_sim === undefined ? "" : String(fact.code_sim));
    row.addEventListener("click", () => handlers.onFocusApp(fact.original));
  }
  container.appendChild(el);
}

export function renderUpdateAttacks(
  container: HTMLElement,
  facts: UpdateAttackFact[],
  handlers: PanelHandlers,
): void {
  container.replaceChildren();
  if (facts.length === 0) {
    return emptyState(container);
  }
  const { table: el, body } = table(["package", "chain", "first malicious version"]);
  for (const fact of facts) {
    const row = body.insertRow();
    row.setAttribute("data-row", "update-attack");
    cell(row, "package_name", fact.package_name);
    const chain = fact.chain
      .map((link) => `v${link.version_code}${link.is_malware ? "☠" : ""}`)
      .join(" → ");
    cell(row, "chain", chain);
    cell(row, "first_malicious_version", String(fact.first_malicious_version));
    row.addEventListener("click", () => handlers.onFocusApp(fact.chain[0].sha256));
  }
  container.appendChild(el);
}

export function renderMarkets(container: HTMLElement, facts: MarketReplicationFact[]): void {
  container.replaceChildren();
  if (facts.length === 0) {
    return emptyState(container);
  }
  const { table: el, body } = table(["market", "apps", "replicated", "ratio"]);
  for (const fact of facts) {
    const row = body.insertRow();
    row.setAttribute("data-row", "market");
    cell(row, "market", fact.market);
    cell(row, "app_count", String(fact.app_count));
    cell(row, "replicated_count", String(fact.replicated_count));
    cell(row, "replication_ratio", String(fact.replication_ratio));
  }
  container.appendChild(el);
}

export function renderSignature(
  container: HTMLElement,
  signature: FamilySignature,
  handlers: PanelHandlers,
): void {
  container.replaceChildren();
  if (signature.clusters.length === 0) {
    return emptyState(container);
  }
  const { table: el, body } = table([
    "representative method",
    "weight",
    "family support",
    "benign support",
  ]);
  for (const cluster of signature.clusters) {
    const row = body.insertRow();
    row.setAttribute("data-row", "cluster");
    cell(row, "representative.method_id", cluster.representative.method_id);
    cell(row, "representative.weight", String(cluster.representative.weight));
    cell(row, "support_in_family", String(cluster.support_in_family));
    cell(row, "support_in_benign", String(cluster.support_in_benign));
    row.addEventListener("click", () => handlers.onFocusApp(cluster.representative.app));
  }
  container.appendChild(el);
}
