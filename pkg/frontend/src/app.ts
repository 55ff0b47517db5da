/** Explorer shell: search box, relationship filters, probability slider,
 * graph pane, and fact panels, all wired to the API client. The controller
 * returned by mountApp exposes the state and actions so tests can drive the
 * UI without synthetic DOM events. */

import { ApiClient, type NodeRef } from "./api.js";
import { renderGraph } from "./graph-view.js";
import {
  renderMarkets,
  renderPiggyback,
  renderSignature,
  renderUpdateAttacks,
  type PanelHandlers,
} from "./panels.js";
import {
  ALL_RELS,
  focusSubgraph,
  initState,
  mergeSubgraph,
  nodeKey,
  openPanel,
  setSlider,
  toggleRel,
  type PanelName,
  type ViewState,
} from "./state.js";

const PANELS: readonly PanelName[] = ["piggyback", "update-attacks", "markets", "signatures"];

const TEMPLATE = `
  <header class="topbar">
    <h1>appvault explorer</h1>
    <form data-role="search-form">
      <input data-role="search-input" placeholder="sha256 or filter (e.g. family = kuguo)" size="48">
      <button type="submit">search</button>
    </form>
    <span class="store-info">records <b data-role="record-count"></b> · built <span data-role="built-at"></span></span>
  </header>
  <div data-role="banner" class="banner" hidden></div>
  <div class="columns">
    <aside class="controls">
      <h2>relationships</h2>
      <div data-role="rel-filters"></div>
      <h2>min probability</h2>
      <label class="slider">
        <input type="range" data-role="prob-slider" step="0.001">
        <output data-role="prob-value"></output>
      </label>
      <div data-role="notice" class="notice" hidden></div>
    </aside>
    <section class="graph-pane">
      <svg data-role="graph"></svg>
    </section>
    <section class="panel-pane">
      <nav data-role="tabs"></nav>
      <div data-role="family-picker" hidden>
        <select data-role="family-select"></select>
        <button type="button" data-role="family-load">load</button>
      </div>
      <div data-role="panel-body"></div>
    </section>
  </div>
`;

export class AppController {
  state: ViewState;

  private readonly root: HTMLElement;
  private readonly api: ApiClient;

  constructor(root: HTMLElement, api: ApiClient, theta: number) {
    this.root = root;
    this.api = api;
    this.state = initState(theta);
  }

  private el<T extends HTMLElement>(role: string): T {
    return this.root.querySelector(`[data-role="${role}"]`) as T;
  }

  private banner(message: string | null): void {
    const banner = this.el("banner");
    banner.hidden = message === null;
    banner.textContent = message ?? "";
  }

  private notice(message: string | null): void {
    const notice = this.el("notice");
    notice.hidden = message === null;
    notice.textContent = message ?? "";
  }

  private renderGraphPane(): void {
    const svg = this.root.querySelector('[data-role="graph"]') as SVGSVGElement;
    renderGraph(svg, this.state, {
      onNodeClick: (node) => void this.expand(node),
    });
  }

  /** Search: resolve the text to app ids via /apps, focus the first hit's
   * depth-1 neighborhood. Bare text that is not a filter expression is
   * treated as an exact sha256. */
  async search(text: string): Promise<void> {
    const trimmed = text.trim();
    if (trimmed === "") {
      this.notice("type a sha256 or a filter expression");
      return;
    }
    this.banner(null);
    const filter = /[=<>]| contains | in /.test(trimmed) ? trimmed : `sha256 = ${trimmed}`;
    try {
      const ids = await this.api.queryApps(filter, "APP", 1);
      if (ids.length === 0) {
        this.notice(`no results for: ${trimmed}`);
        return;
      }
      this.notice(null);
      await this.focusApp(ids[0]);
    } catch (err) {
      this.banner(`service unreachable: ${String(err)}`);
    }
  }

  async focusApp(sha256: string): Promise<void> {
    try {
      const subgraph = await this.api.neighbors(sha256, "APP", 1);
      this.state = focusSubgraph(this.state, `APP:${sha256}`, subgraph);
      this.renderGraphPane();
    } catch (err) {
      this.banner(`service unreachable: ${String(err)}`);
    }
  }

  /** Expand a rendered node: merge its depth-1 neighborhood into the view.
   * Expanding the same node again is a no-op on the node set. */
  async expand(node: NodeRef): Promise<void> {
    try {
      const subgraph = await this.api.neighbors(node.id, node.kind, 1);
      this.state = mergeSubgraph(this.state, nodeKey(node), subgraph);
      this.renderGraphPane();
    } catch (err) {
      this.banner(`service unreachable: ${String(err)}`);
    }
  }

  setSlider(value: number): void {
    this.state = setSlider(this.state, value);
    this.el<HTMLOutputElement>("prob-value").value = String(this.state.slider);
    this.renderGraphPane();
  }

  toggleRel(rel: string): void {
    this.state = toggleRel(this.state, rel);
    this.renderGraphPane();
  }

  async selectPanel(panel: PanelName): Promise<void> {
    this.state = openPanel(this.state, panel);
    const body = this.el("panel-body");
    this.el("family-picker").hidden = panel !== "signatures";
    const handlers: PanelHandlers = { onFocusApp: (sha) => void this.focusApp(sha) };
    try {
      if (panel === "piggyback") {
        renderPiggyback(body, await this.api.piggybacked(), handlers);
      } else if (panel === "update-attacks") {
        renderUpdateAttacks(body, await this.api.updateAttacks(), handlers);
      } else if (panel === "markets") {
        renderMarkets(body, await this.api.markets());
      } else {
        await this.populateFamilies();
        body.replaceChildren();
      }
    } catch (err) {
      this.banner(`service unreachable: ${String(err)}`);
    }
  }

  private async populateFamilies(): Promise<void> {
    const select = this.el<HTMLSelectElement>("family-select");
    const families = await this.api.queryApps("", "FAMILY");
    select.replaceChildren(
      ...families.map((name) => {
        const option = document.createElement("option");
        option.value = name;
        option.textContent = name;
        return option;
      }),
    );
  }

  async loadSignature(family: string): Promise<void> {
    const body = this.el("panel-body");
    const handlers: PanelHandlers = { onFocusApp: (sha) => void this.focusApp(sha) };
    try {
      renderSignature(body, await this.api.signatures(family), handlers);
    } catch (err) {
      this.banner(`service unreachable: ${String(err)}`);
    }
  }

  mountStatic(recordCount: number, builtAt: string): void {
    this.el("record-count").textContent = String(recordCount);
    this.el("built-at").textContent = builtAt;

    const filters = this.el("rel-filters");
    for (const rel of ALL_RELS) {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = true;
      box.setAttribute("data-rel", rel);
      box.addEventListener("change", () => this.toggleRel(rel));
      label.append(box, rel);
      filters.appendChild(label);
    }

    const slider = this.el<HTMLInputElement>("prob-slider");
    slider.min = String(this.state.theta);
    slider.max = "1";
    slider.value = String(this.state.theta);
    this.el<HTMLOutputElement>("prob-value").value = String(this.state.theta);
    slider.addEventListener("input", () => this.setSlider(Number(slider.value)));

    const tabs = this.el("tabs");
    for (const panel of PANELS) {
      const button = document.createElement("button");
      button.type = "button";
      button.setAttribute("data-panel", panel);
      button.textContent = panel;
      button.addEventListener("click", () => void this.selectPanel(panel));
      tabs.appendChild(button);
    }

    const form = this.el<HTMLFormElement>("search-form");
    const input = this.el<HTMLInputElement>("search-input");
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.search(input.value);
    });

    this.el<HTMLButtonElement>("family-load").addEventListener("click", () => {
      const select = this.el<HTMLSelectElement>("family-select");
      if (select.value) {
        void this.loadSignature(select.value);
      }
    });
  }
}

export async function mountApp(root: HTMLElement, api: ApiClient): Promise<AppController> {
  root.innerHTML = TEMPLATE;
  let theta = 0.9;
  let recordCount = 0;
  let builtAt = "";
  let healthError: string | null = null;
  try {
    const health = await api.health();
    theta = health.theta;
    recordCount = health.record_count;
    builtAt = health.built_at;
  } catch (err) {
    healthError = `service unreachable: ${String(err)}`;
  }
  const controller = new AppController(root, api, theta);
  controller.mountStatic(recordCount, builtAt);
  if (healthError !== null) {
    const banner = root.querySelector('[data-role="banner"]') as HTMLElement;
    banner.hidden = false;
    banner.textContent = healthError;
  }
  return controller;
}
