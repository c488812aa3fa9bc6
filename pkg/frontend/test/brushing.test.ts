// Acceptance: linked brushing. Selections made in the projection shade the
// owning sample range in the series view, and a time selection highlights
// every window containing that instant. Both directions run against the
// real analytics service and are checked against the window arithmetic
// computed independently here.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { bootstrap } from "../src/main.js";
import type { App } from "../src/main.js";
import { scatterMapping, pointsInRect } from "../src/scatter.js";
import { timeMapping } from "../src/timeplot.js";
import { AppStore } from "../src/store.js";
import { sineCsv, startService, uploadDataset, waitUntil } from "./service.js";
import type { ServiceHandle } from "./service.js";

const N = 400;
const WINDOW = 48;

let service: ServiceHandle;
let app: App;
let store: AppStore;

function pointerAt(type: string, x: number, y: number): MouseEvent {
  return new MouseEvent(type, { clientX: x, clientY: y, bubbles: true });
}

beforeAll(async () => {
  service = await startService();
  await uploadDataset(service.baseUrl, "waves", sineCsv(N));

  document.body.textContent = "";
  const root = document.createElement("div");
  document.body.appendChild(root);
  store = new AppStore(new ApiClient(service.baseUrl), {
    debounceMs: 10,
    pollIntervalMs: 50,
  });
  app = bootstrap(root, store);
  await waitUntil(() => store.datasets.length > 0, 30_000, "dataset list");

  // fast linear projection keeps the run deterministic and quick
  const algorithm = document.getElementById("algorithm-select") as HTMLSelectElement;
  algorithm.value = "pca";
  algorithm.dispatchEvent(new Event("change", { bubbles: true }));

  const select = document.getElementById("dataset-select") as HTMLSelectElement;
  select.value = "waves";
  select.dispatchEvent(new Event("change", { bubbles: true }));
  await waitUntil(() => store.current !== null, 90_000, "pipeline run");
});

afterAll(async () => {
  await service.stop();
});

// a displayed point whose screen position is clearly separated from others,
// so a small brush rectangle hits exactly one point
function isolatedPoint(): { sourceIndex: number; x: number; y: number; halfSize: number } {
  const display = store.current!.display;
  const points = display.projection.points;
  const indices = display.projection.indices;
  const canvas = app.scatter.canvas;
  const mapping = scatterMapping(points, canvas.width, canvas.height);
  const screen = points.map(([x, y]) => [mapping.toX(x), mapping.toY(y)]);
  let bestPos = 0;
  let bestDist = -Infinity;
  for (let i = 0; i < screen.length; i++) {
    let nearest = Infinity;
    for (let j = 0; j < screen.length; j++) {
      if (i === j) {
        continue;
      }
      const dx = screen[i]![0]! - screen[j]![0]!;
      const dy = screen[i]![1]! - screen[j]![1]!;
      const d = Math.hypot(dx, dy);
      if (d < nearest) {
        nearest = d;
      }
    }
    if (nearest > bestDist) {
      bestDist = nearest;
      bestPos = i;
    }
  }
  const halfSize = Math.max(0.5, Math.min(4, bestDist / 2 - 0.25));
  const [x, y] = screen[bestPos]!;
  const rect = { x0: x! - halfSize, y0: y! - halfSize, x1: x! + halfSize, y1: y! + halfSize };
  const hit = pointsInRect(points, indices, mapping, rect);
  expect(hit).toEqual([indices[bestPos]!]);
  return { sourceIndex: indices[bestPos]!, x: x!, y: y!, halfSize };
}

describe("linked brushing", () => {
  it("projection point i shades exactly samples [i, i+w-1]", async () => {
    const summary = store.current!.summary;
    expect(summary.window).toBe(WINDOW);
    expect(summary.stride).toBe(1);
    expect(summary.m).toBe(N - WINDOW + 1);

    const target = isolatedPoint();
    const canvas = app.scatter.canvas;
    canvas.dispatchEvent(
      pointerAt("pointerdown", target.x - target.halfSize, target.y - target.halfSize),
    );
    canvas.dispatchEvent(
      pointerAt("pointerup", target.x + target.halfSize, target.y + target.halfSize),
    );
    await waitUntil(
      () => store.selection.origin === "projection",
      10_000,
      "selection resolved",
    );

    const i = target.sourceIndex;
    expect(store.selection.pointIndices).toEqual([i]);
    expect(store.selection.timeRanges).toEqual([[i, i + WINDOW - 1]]);
    expect(app.timePlot.shadedRanges()).toEqual([[i, i + WINDOW - 1]]);
  });

  it("holds w-length shading across boundary points", async () => {
    const m = store.current!.summary.m!;
    for (const i of [0, 57, m - 1]) {
      await store.selectPoints([i]);
      expect(store.selection.timeRanges).toEqual([[i, i + WINDOW - 1]]);
      expect(app.timePlot.shadedRanges()).toEqual([[i, i + WINDOW - 1]]);
    }
  });

  it("clicking time t highlights every window containing t", async () => {
    const display = store.current!.display;
    const viewport: [number, number] = display.viewport ?? [
      0,
      display.series.source_length - 1,
    ];
    expect(viewport).toEqual([0, N - 1]);

    const t = 200;
    const canvas = app.timePlot.canvas;
    const mapping = timeMapping(viewport, canvas.width);
    const x = mapping.xForIndex(t);
    canvas.dispatchEvent(pointerAt("pointerdown", x, 40));
    canvas.dispatchEvent(pointerAt("pointerup", x, 40));
    await waitUntil(() => store.selection.origin === "time", 10_000, "time selection");

    const m = store.current!.summary.m!;
    const expected: number[] = [];
    for (let j = Math.max(0, t - WINDOW + 1); j <= Math.min(t, m - 1); j++) {
      expected.push(j);
    }
    expect(store.selection.pointIndices).toEqual(expected);
    expect(store.selection.timeRanges).toEqual([[t, t]]);
  });

  it("maps containment exactly at the series edges", async () => {
    const m = store.current!.summary.m!;
    await store.selectTime(0, 0);
    expect(store.selection.pointIndices).toEqual([0]);

    await store.selectTime(N - 1, N - 1);
    expect(store.selection.pointIndices).toEqual([m - 1]);
  });

  it("clears both views on an empty brush", async () => {
    await store.selectPoints([5]);
    expect(store.selection.timeRanges.length).toBe(1);

    // the padded corner of the canvas holds no points
    const canvas = app.scatter.canvas;
    canvas.dispatchEvent(pointerAt("pointerdown", 0, 0));
    canvas.dispatchEvent(pointerAt("pointerup", 2, 2));
    await waitUntil(() => store.selection.origin === "none", 10_000, "cleared");
    expect(store.selection.pointIndices).toEqual([]);
    expect(store.selection.timeRanges).toEqual([]);
    expect(app.timePlot.shadedRanges()).toEqual([]);
  });
});
