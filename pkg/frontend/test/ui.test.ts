import { describe, expect, it } from "vitest";

import type { ApiClient, DisplayPayload, LogsPayload, RunSummary } from "../src/api.js";
import { bootstrap } from "../src/main.js";
import type { App } from "../src/main.js";
import { AppStore } from "../src/store.js";
import { waitUntil } from "./service.js";

const LOGS: LogsPayload = {
  cache: {
    budget_bytes: 1024,
    entries: 7,
    stages: [
      { stage: "load", compute_count: 3, hit_count: 9, last_compute_duration: 0.5 },
      { stage: "project", compute_count: 1, hit_count: 2, last_compute_duration: 2.25 },
      { stage: "cluster", compute_count: 2, hit_count: 0, last_compute_duration: 0.125 },
    ],
  },
  runs: [
    { factor: 75, stage: "resample", elements: 98630, wall_seconds: 0.2, compute_count: 1, error: null },
    { factor: 15, stage: "resample", elements: 493149, wall_seconds: 0.9, compute_count: 1, error: null },
  ],
};

function uiStub() {
  const summary: RunSummary = {
    run_id: "run-xyz",
    status: "done",
    request: null,
    m: 5,
    elements: 24,
    window: 20,
    stride: 1,
    fingerprints: { load: "aaaa", project: "bbbb" },
    clustering: false,
  };
  const display: DisplayPayload = {
    run_id: "run-xyz",
    viewport: null,
    fingerprints: {},
    series: {
      cap: 10000,
      source_length: 24,
      channels: [
        { name: "ch0", timestamps: [0, 1, 2], values: [0.5, null, -0.5] },
      ],
    },
    projection: {
      total_points: 5,
      indices: [0, 1, 2, 3, 4],
      points: [
        [0, 0],
        [1, 2],
        [2, 1],
        [3, 3],
        [4, 0],
      ],
      labels: [0, 0, 1, 1, -1],
    },
  };
  return {
    async listDatasets() {
      return [
        { id: "a1", kind: "dataset", name: "demo", version: 1, metadata: { rows: "200" } },
      ];
    },
    async startPipeline() {
      return { run_id: "run-xyz", status: "running" };
    },
    async runStatus() {
      return summary;
    },
    async display() {
      return display;
    },
    async pointsToTime(_id: string, indices: number[]) {
      return indices.map((i) => [i, i + 19] as [number, number]);
    },
    async timeToPoints() {
      return [0, 1];
    },
    async logs() {
      return LOGS;
    },
  } as unknown as ApiClient;
}

async function mountApp(): Promise<App> {
  document.body.textContent = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  const store = new AppStore(uiStub(), { debounceMs: 5, pollIntervalMs: 5 });
  const app = bootstrap(root, store);
  await waitUntil(() => store.datasets.length > 0, 5_000, "datasets");
  return app;
}

function pickDataset(): void {
  const select = document.getElementById("dataset-select") as HTMLSelectElement;
  select.value = "demo";
  select.dispatchEvent(new Event("change", { bubbles: true }));
}

describe("application shell", () => {
  it("mounts every control the panel promises", async () => {
    await mountApp();
    for (const id of [
      "dataset-select",
      "resample-slider",
      "window-slider",
      "encoder-select",
      "algorithm-select",
      "n-neighbors-slider",
      "min-dist-slider",
      "random-state-slider",
      "clustering-toggle",
      "min-cluster-size-slider",
      "min-samples-slider",
      "alpha-slider",
      "point-size-slider",
      "show-lines-toggle",
      "palette-select",
      "tab-projections",
      "tab-information",
      "tab-logs",
      "scatter-canvas",
      "time-canvas",
      "zoom-in-btn",
      "zoom-reset-btn",
      "clear-selection-btn",
      "download-btn",
    ]) {
      expect(document.getElementById(id), id).not.toBeNull();
    }
  });

  it("applies dataset metadata to slider bounds", async () => {
    const app = await mountApp();
    pickDataset();
    await waitUntil(() => app.store.current !== null, 5_000, "run");
    const windowSlider = document.getElementById("window-slider") as HTMLInputElement;
    expect(windowSlider.max).toBe("200");
  });

  it("switches tabs and renders run information", async () => {
    const app = await mountApp();
    pickDataset();
    await waitUntil(() => app.store.current !== null, 5_000, "run");

    (document.getElementById("tab-information") as HTMLButtonElement).click();
    expect(document.getElementById("pane-information")!.classList.contains("hidden")).toBe(false);
    expect(document.getElementById("pane-projections")!.classList.contains("hidden")).toBe(true);
    const info = document.getElementById("run-info")!.textContent!;
    expect(info).toContain("run-xyz");
    expect(info).toContain("windows");
  });

  it("renders the log feed as sortable tables", async () => {
    const app = await mountApp();
    pickDataset();
    await waitUntil(() => app.store.current !== null, 5_000, "run");

    (document.getElementById("tab-logs") as HTMLButtonElement).click();
    await waitUntil(() => app.store.logs !== null, 5_000, "logs fetched");

    const cacheTable = document.getElementById("cache-table")!;
    const headers = Array.from(cacheTable.querySelectorAll("th")).map(
      (th) => th.textContent ?? "",
    );
    expect(headers[0]).toContain("stage");
    expect(headers[1]).toContain("computes");
    expect(headers[2]).toContain("hits");
    expect(headers[3]).toContain("seconds");

    // unsorted: file order from the service
    expect(app.cacheTable.cellText().map((r) => r[0])).toEqual([
      "load",
      "project",
      "cluster",
    ]);

    // click once for ascending by computes, twice for descending
    (cacheTable.querySelectorAll("th")[1] as HTMLElement).click();
    expect(app.cacheTable.cellText().map((r) => r[1])).toEqual(["1", "2", "3"]);
    (document.getElementById("cache-table")!.querySelectorAll("th")[1] as HTMLElement).click();
    expect(app.cacheTable.cellText().map((r) => r[1])).toEqual(["3", "2", "1"]);

    const runsRows = app.runsTable.cellText();
    expect(runsRows.length).toBe(2);
    expect(runsRows[0]![2]).toBe("98630");
  });

  it("sorts string columns alphabetically", async () => {
    const app = await mountApp();
    pickDataset();
    await waitUntil(() => app.store.current !== null, 5_000, "run");
    (document.getElementById("tab-logs") as HTMLButtonElement).click();
    await waitUntil(() => app.store.logs !== null, 5_000, "logs fetched");

    const cacheTable = document.getElementById("cache-table")!;
    (cacheTable.querySelectorAll("th")[0] as HTMLElement).click();
    expect(app.cacheTable.cellText().map((r) => r[0])).toEqual([
      "cluster",
      "load",
      "project",
    ]);
  });

  it("keeps the download button safe without a canvas backend", async () => {
    const app = await mountApp();
    pickDataset();
    await waitUntil(() => app.store.current !== null, 5_000, "run");
    expect(app.scatter.imageDataUrl()).toBeNull();
    expect(() =>
      (document.getElementById("download-btn") as HTMLButtonElement).click(),
    ).not.toThrow();
  });

  it("shows service failures in the toast", async () => {
    const api = uiStub() as unknown as Record<string, unknown>;
    api["startPipeline"] = async () => {
      throw new Error("synthetic outage");
    };
    document.body.textContent = "";
    const root = document.createElement("div");
    document.body.appendChild(root);
    const store = new AppStore(api as unknown as ApiClient, {
      debounceMs: 5,
      pollIntervalMs: 5,
    });
    bootstrap(root, store);
    await waitUntil(() => store.datasets.length > 0, 5_000, "datasets");
    pickDataset();
    await waitUntil(() => store.lastError !== null, 5_000, "error surfaced");
    const toast = document.getElementById("toast")!;
    expect(toast.classList.contains("hidden")).toBe(false);
    expect(toast.textContent).toContain("synthetic outage");
  });
});
