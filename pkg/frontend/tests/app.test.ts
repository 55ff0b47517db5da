/** End-to-end UI tests with request interception: a stubbed fetch serves
 * canned bodies captured from a real service over the seed-1 corpus (25
 * planted piggyback pairs, 15 update-attack chains, 5 families). */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, type Subgraph } from "../src/api.js";
import { AppController, mountApp } from "../src/app.js";

import appsSearch from "./fixtures/apps_search.json";
import families from "./fixtures/families.json";
import health from "./fixtures/health.json";
import markets from "./fixtures/markets.json";
import meta from "./fixtures/meta.json";
import neighborsAuthor from "./fixtures/neighbors_author.json";
import neighborsFocus from "./fixtures/neighbors_focus.json";
import piggybacked from "./fixtures/piggybacked.json";
import signaturesKuguo from "./fixtures/signatures_kuguo.json";
import updateAttacks from "./fixtures/update_attacks.json";

const FOCUS: string = meta.focus;
const AUTHOR: string = meta.author;

function response(body: unknown): Response {
  return {
    ok: true,
    status: 200,
    json: async () => body,
  } as unknown as Response;
}

function intercept(log: string[]): void {
  vi.stubGlobal("fetch", async (input: RequestInfo | URL): Promise<Response> => {
    const url = new URL(String(input), "http://service.test");
    log.push(url.pathname + url.search);
    const params = url.searchParams;
    switch (url.pathname) {
      case "/health":
        return response(health);
      case "/apps":
        if (params.get("kind") === "FAMILY") {
          return response(families);
        }
        if ((params.get("filter") ?? "").includes(FOCUS)) {
          return response(appsSearch);
        }
        return response([]);
      case "/graph/neighbors":
        if (params.get("id") === FOCUS) {
          return response(neighborsFocus);
        }
        if (params.get("id") === AUTHOR) {
          return response(neighborsAuthor);
        }
        return response({ nodes: [], edges: [] });
      case "/facts/piggybacked":
        return response(piggybacked);
      case "/facts/update-attacks":
        return response(updateAttacks);
      case "/facts/markets":
        return response(markets);
      case "/facts/families/kuguo/signatures":
        return response(signaturesKuguo);
      default:
        throw new Error(`unrouted: ${url.pathname}`);
    }
  });
}

describe("explorer app", () => {
  let root: HTMLElement;
  let controller: AppController;
  let log: string[];

  beforeEach(async () => {
    log = [];
    intercept(log);
    document.body.innerHTML = '<div id="app"></div>';
    root = document.getElementById("app")!;
    controller = await mountApp(root, new ApiClient(""));
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("shows manifest fields and pins the slider minimum to theta", () => {
    expect(root.querySelector('[data-role="record-count"]')!.textContent).toBe(
      String(health.record_count),
    );
    expect(root.querySelector('[data-role="built-at"]')!.textContent).toBe(health.built_at);
    const slider = root.querySelector('[data-role="prob-slider"]') as HTMLInputElement;
    expect(slider.min).toBe(String(health.theta));
    expect(slider.value).toBe(String(health.theta));
    expect(controller.state.theta).toBe(health.theta);
  });

  it("search focuses the depth-1 neighborhood and renders the body verbatim", async () => {
    await controller.search(FOCUS);
    const rendered = [...root.querySelectorAll("[data-node]")];
    expect(rendered.length).toBe(neighborsFocus.nodes.length);
    const renderedIds = new Set(rendered.map((el) => el.getAttribute("data-id")));
    for (const node of neighborsFocus.nodes) {
      expect(renderedIds.has(node.id)).toBe(true);
    }
    // every probability label shown equals a prob field of the response
    const probs = new Set(
      (neighborsFocus as Subgraph).edges
        .filter((e) => e.prob !== undefined)
        .map((e) => String(e.prob)),
    );
    for (const line of root.querySelectorAll("[data-edge][data-prob]")) {
      expect(probs.has(line.getAttribute("data-prob")!)).toBe(true);
    }
    expect(log).toContain(`/graph/neighbors?id=${FOCUS}&kind=APP&depth=1`);
  });

  it("renders only edges passing the relationship filters and slider", async () => {
    await controller.search(FOCUS);
    const allRels = [...root.querySelectorAll("[data-edge]")].map((l) =>
      l.getAttribute("data-rel"),
    );
    expect(allRels).toContain("code_sim");
    expect(allRels).toContain("comp_sim");

    // slider above the code_sim prob hides it but keeps comp_sim (1.0)
    controller.setSlider(0.96);
    let rels = [...root.querySelectorAll("[data-edge]")].map((l) => l.getAttribute("data-rel"));
    expect(rels).not.toContain("code_sim");
    expect(rels).toContain("comp_sim");

    controller.toggleRel("comp_sim");
    rels = [...root.querySelectorAll("[data-edge]")].map((l) => l.getAttribute("data-rel"));
    expect(rels).not.toContain("comp_sim");
  });

  it("expand merges the clicked node's neighborhood and is idempotent", async () => {
    await controller.search(FOCUS);
    const before = root.querySelectorAll("[data-node]").length;

    await controller.expand({ id: AUTHOR, kind: "AUTHOR" });
    const once = root.querySelectorAll("[data-node]").length;
    expect(once).toBeGreaterThanOrEqual(before);
    const keysOnce = [...controller.state.nodes.keys()].sort();

    await controller.expand({ id: AUTHOR, kind: "AUTHOR" });
    const twice = root.querySelectorAll("[data-node]").length;
    expect(twice).toBe(once);
    expect([...controller.state.nodes.keys()].sort()).toEqual(keysOnce);
    expect(new Set(controller.state.expanded).has(`AUTHOR:${AUTHOR}`)).toBe(true);
  });

  it("piggyback panel shows exactly the 25 planted rows, cells from fields", async () => {
    await controller.selectPanel("piggyback");
    const rows = root.querySelectorAll('[data-row="piggyback"]');
    expect(rows.length).toBe(25);
    rows.forEach((row, i) => {
      const fact = piggybacked[i];
      expect(row.querySelector('[data-field="package_name"]')!.textContent).toBe(
        fact.package_name,
      );
      expect(row.querySelector('[data-field="version_code"]')!.textContent).toBe(
        String(fact.version_code),
      );
      expect(row.querySelector('[data-field="original"]')!.getAttribute("title")).toBe(
        fact.original,
      );
    });
  });

  it("update-attack panel shows exactly the 15 planted rows", async () => {
    await controller.selectPanel("update-attacks");
    const rows = root.querySelectorAll('[data-row="update-attack"]');
    expect(rows.length).toBe(15);
    rows.forEach((row, i) => {
      expect(row.querySelector('[data-field="first_malicious_version"]')!.textContent).toBe(
        String(updateAttacks[i].first_malicious_version),
      );
    });
  });

  it("market panel cells equal response fields", async () => {
    await controller.selectPanel("markets");
    const rows = root.querySelectorAll('[data-row="market"]');
    expect(rows.length).toBe(markets.length);
    rows.forEach((row, i) => {
      expect(row.querySelector('[data-field="market"]')!.textContent).toBe(markets[i].market);
      expect(row.querySelector('[data-field="app_count"]')!.textContent).toBe(
        String(markets[i].app_count),
      );
      expect(row.querySelector('[data-field="replication_ratio"]')!.textContent).toBe(
        String(markets[i].replication_ratio),
      );
    });
  });

  it("signature panel lists families from the API and renders clusters", async () => {
    await controller.selectPanel("signatures");
    const select = root.querySelector('[data-role="family-select"]') as HTMLSelectElement;
    expect([...select.options].map((o) => o.value)).toEqual(families);

    await controller.loadSignature("kuguo");
    const rows = root.querySelectorAll('[data-row="cluster"]');
    expect(rows.length).toBe(signaturesKuguo.clusters.length);
    const cluster = signaturesKuguo.clusters[0];
    expect(rows[0].querySelector('[data-field="representative.method_id"]')!.textContent).toBe(
      cluster.representative.method_id,
    );
    expect(rows[0].querySelector('[data-field="support_in_family"]')!.textContent).toBe(
      String(cluster.support_in_family),
    );
  });

  it("clicking a fact row focuses the involved app", async () => {
    await controller.selectPanel("piggyback");
    const index = piggybacked.findIndex((f) => f.original === FOCUS);
    expect(index).toBeGreaterThanOrEqual(0);
    const row = root.querySelectorAll('[data-row="piggyback"]')[index] as HTMLElement;
    row.click();
    await vi.waitFor(() => {
      expect(controller.state.focused).toBe(`APP:${FOCUS}`);
    });
  });

  it("every rendered numeric cell maps to one API response field", async () => {
    await controller.selectPanel("markets");
    const harvest = new Set<string>();
    const walk = (value: unknown): void => {
      if (typeof value === "number") {
        harvest.add(String(value));
      } else if (Array.isArray(value)) {
        value.forEach(walk);
      } else if (value !== null && typeof value === "object") {
        Object.values(value).forEach(walk);
      }
    };
    walk(markets);
    walk(health);
    for (const cellEl of root.querySelectorAll("[data-field]")) {
      const text = cellEl.textContent ?? "";
      if (/^[0-9.]+$/.test(text)) {
        expect(harvest.has(text), `untraceable number ${text}`).toBe(true);
      }
    }
  });

  it("empty and unmatched searches show the notice, view unchanged", async () => {
    await controller.search("");
    const notice = root.querySelector('[data-role="notice"]') as HTMLElement;
    expect(notice.hidden).toBe(false);

    await controller.search("f".repeat(64));
    expect(notice.hidden).toBe(false);
    expect(notice.textContent).toContain("no results");
    expect(root.querySelectorAll("[data-node]").length).toBe(0);
  });

  it("shows a banner when the service is unreachable", async () => {
    vi.stubGlobal("fetch", async () => {
      throw new Error("connection refused");
    });
    document.body.innerHTML = '<div id="app"></div>';
    const deadRoot = document.getElementById("app")!;
    const dead = await mountApp(deadRoot, new ApiClient(""));
    const banner = deadRoot.querySelector('[data-role="banner"]') as HTMLElement;
    expect(banner.hidden).toBe(false);

    await dead.search("family = kuguo");
    expect(banner.textContent).toContain("service unreachable");
  });
});
