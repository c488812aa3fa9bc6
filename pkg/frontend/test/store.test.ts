import { describe, expect, it } from "vitest";

import type { ApiClient, DisplayPayload, PipelineRequest, RunSummary } from "../src/api.js";
import { AppStore } from "../src/store.js";
import { waitUntil } from "./service.js";

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

// In-memory stand-in for the service with controllable completion order.
function stubApi(options: { autoDone?: boolean } = {}) {
  const autoDone = options.autoDone ?? true;
  const started: PipelineRequest[] = [];
  const released = new Set<string>();
  const calls = { pointsToTime: 0, timeToPoints: 0, logs: 0 };
  let failNextStart: string | null = null;

  const runId = (req: PipelineRequest): string =>
    `run-w${req.window}-d${req.dr.min_dist}`;

  const summaries = new Map<string, RunSummary>();

  const api = {
    async listDatasets() {
      return [
        {
          id: "a1",
          kind: "dataset",
          name: "demo",
          version: 1,
          metadata: { rows: "200", channels: "1" },
        },
      ];
    },
    async startPipeline(req: PipelineRequest) {
      if (failNextStart) {
        const message = failNextStart;
        failNextStart = null;
        throw new Error(message);
      }
      started.push(req);
      const id = runId(req);
      summaries.set(id, {
        run_id: id,
        status: "done",
        request: null,
        m: 10,
        elements: 20,
        window: req.window,
        stride: req.stride,
        fingerprints: {},
        clustering: false,
      });
      return { run_id: id, status: "running" };
    },
    async runStatus(id: string): Promise<RunSummary> {
      if (autoDone || released.has(id)) {
        return summaries.get(id)!;
      }
      return { run_id: id, status: "running", request: null };
    },
    async display(id: string): Promise<DisplayPayload> {
      return {
        run_id: id,
        viewport: null,
        fingerprints: {},
        series: {
          cap: 10000,
          source_length: 20,
          channels: [
            {
              name: "ch0",
              timestamps: [0, 1, 2, 3],
              values: [0, 1, 0, -1],
            },
          ],
        },
        projection: {
          total_points: 10,
          indices: [0, 1, 2],
          points: [
            [0, 0],
            [1, 1],
            [2, 0],
          ],
          labels: null,
        },
      };
    },
    async pointsToTime(_id: string, indices: number[]) {
      calls.pointsToTime += 1;
      return indices.map((i) => [i, i + 15] as [number, number]);
    },
    async timeToPoints() {
      calls.timeToPoints += 1;
      return [1, 2];
    },
    async logs() {
      calls.logs += 1;
      return { cache: { budget_bytes: 0, entries: 0, stages: [] }, runs: [] };
    },
  };
  return {
    api: api as unknown as ApiClient,
    started,
    release: (id: string) => released.add(id),
    failNext: (message: string) => {
      failNextStart = message;
    },
    calls,
  };
}

describe("run scheduling", () => {
  it("collapses a debounced slider sweep into one pipeline request", async () => {
    const stub = stubApi();
    const store = new AppStore(stub.api, { debounceMs: 60, pollIntervalMs: 5 });
    store.setDataset("demo");
    store.setParam("window", 16);
    store.setParam("window", 24);
    store.setParam("window", 32);
    await waitUntil(() => store.current !== null, 5_000, "run to finish");
    expect(stub.started.length).toBe(1);
    expect(stub.started[0]!.window).toBe(32);
  });

  it("ignores parameter writes that do not change the value", async () => {
    const stub = stubApi();
    const store = new AppStore(stub.api, { debounceMs: 20, pollIntervalMs: 5 });
    store.setDataset("demo");
    await waitUntil(() => store.current !== null, 5_000, "first run");
    store.setParam("window", store.state.window);
    await sleep(100);
    expect(stub.started.length).toBe(1);
  });

  it("reuses the issued run when parameters return to an earlier state", async () => {
    const stub = stubApi();
    const store = new AppStore(stub.api, { debounceMs: 10, pollIntervalMs: 5 });
    store.setDataset("demo");
    await waitUntil(() => store.current !== null, 5_000, "first run");
    const firstFingerprint = store.current!.fingerprint;

    store.setParam("window", 32);
    await waitUntil(
      () => store.current?.summary.window === 32,
      5_000,
      "second run",
    );
    expect(stub.started.length).toBe(2);

    store.setParam("window", 48); // back to the original request
    await waitUntil(
      () => store.current?.fingerprint === firstFingerprint,
      5_000,
      "cached run restored",
    );
    expect(stub.started.length).toBe(2);
  });

  it("discards responses that arrive for a superseded request", async () => {
    const stub = stubApi({ autoDone: false });
    const store = new AppStore(stub.api, { debounceMs: 0, pollIntervalMs: 10 });
    let runEvents = 0;
    store.on("run", () => {
      runEvents += 1;
    });
    store.setDataset("demo");
    await waitUntil(() => stub.started.length === 1, 5_000, "first submission");
    store.setParam("window", 32);
    await waitUntil(() => stub.started.length === 2, 5_000, "second submission");

    stub.release("run-w32-d0.1");
    await waitUntil(() => store.current?.summary.window === 32, 5_000, "newer run");

    stub.release("run-w48-d0.1");
    await sleep(150);
    expect(store.current!.summary.window).toBe(32);
    expect(runEvents).toBe(1);
  });

  it("clears a failed submission so it can be retried", async () => {
    const stub = stubApi();
    const store = new AppStore(stub.api, { debounceMs: 0, pollIntervalMs: 5 });
    stub.failNext("boom");
    store.setDataset("demo");
    await waitUntil(() => store.lastError !== null, 5_000, "failure surfaced");
    expect(store.current).toBeNull();

    await store.launch(); // same request again
    await waitUntil(() => store.current !== null, 5_000, "retry succeeded");
    expect(stub.started.length).toBe(1);
  });
});

describe("selection and aesthetics", () => {
  it("clears an empty brush locally without a service call", async () => {
    const stub = stubApi();
    const store = new AppStore(stub.api, { debounceMs: 0, pollIntervalMs: 5 });
    store.setDataset("demo");
    await waitUntil(() => store.current !== null, 5_000, "run");
    await store.selectPoints([2]);
    expect(stub.calls.pointsToTime).toBe(1);
    expect(store.selection.timeRanges).toEqual([[2, 17]]);

    await store.selectPoints([]);
    expect(stub.calls.pointsToTime).toBe(1);
    expect(store.selection.pointIndices).toEqual([]);
    expect(store.selection.timeRanges).toEqual([]);
  });

  it("changes aesthetics without scheduling any request", async () => {
    const stub = stubApi();
    const store = new AppStore(stub.api, { debounceMs: 10, pollIntervalMs: 5 });
    store.setDataset("demo");
    await waitUntil(() => store.current !== null, 5_000, "run");
    const startsBefore = stub.started.length;
    store.setAesthetics({ alpha: 0.3 });
    store.setAesthetics({ pointSize: 8, showLines: true });
    store.setAesthetics({ palette: "vivid" });
    await sleep(80);
    expect(stub.started.length).toBe(startsBefore);
    expect(store.state.aesthetics.alpha).toBeCloseTo(0.3);
    expect(store.state.aesthetics.palette).toBe("vivid");
  });
});
