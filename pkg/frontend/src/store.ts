// Central store: owns UI state, schedules pipeline runs, and holds the
// latest results. Control changes are debounced; each distinct request is
// submitted exactly once; responses arriving for a request that is no longer
// the most recent are discarded.

import { ApiClient, ApiError } from "./api.js";
import type { DatasetInfo, DisplayPayload, LogsPayload, RunSummary } from "./api.js";
import { buildRequest, defaultState, requestFingerprint } from "./state.js";
import type { Aesthetics, UiState } from "./state.js";

export interface RunView {
  fingerprint: string;
  runId: string;
  summary: RunSummary;
  display: DisplayPayload;
}

export interface Selection {
  pointIndices: number[];
  timeRanges: [number, number][];
  origin: "none" | "projection" | "time";
}

export type StoreEvent =
  | "state"
  | "datasets"
  | "run-started"
  | "run"
  | "selection"
  | "aesthetics"
  | "display"
  | "logs"
  | "error";

type Listener = () => void;

const EMPTY_SELECTION: Selection = { pointIndices: [], timeRanges: [], origin: "none" };

export interface StoreOptions {
  debounceMs?: number;
  pollIntervalMs?: number;
}

export class AppStore {
  state: UiState = defaultState();
  datasets: DatasetInfo[] = [];
  current: RunView | null = null;
  selection: Selection = EMPTY_SELECTION;
  logs: LogsPayload | null = null;
  lastError: string | null = null;
  running = false;

  private readonly debounceMs: number;
  private readonly pollIntervalMs: number;
  private debounceTimer: ReturnType<typeof setTimeout> | null = null;
  // one entry per distinct request ever issued; repeats reuse the promise
  private readonly issued = new Map<string, Promise<RunView>>();
  private pendingFingerprint: string | null = null;
  private displayEpoch = 0;
  private readonly listeners = new Map<StoreEvent, Set<Listener>>();

  constructor(
    readonly api: ApiClient,
    options: StoreOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? 300;
    this.pollIntervalMs = options.pollIntervalMs ?? 200;
  }

  on(event: StoreEvent, listener: Listener): () => void {
    let set = this.listeners.get(event);
    if (!set) {
      set = new Set();
      this.listeners.set(event, set);
    }
    set.add(listener);
    return () => set.delete(listener);
  }

  private emit(event: StoreEvent): void {
    for (const listener of this.listeners.get(event) ?? []) {
      listener();
    }
  }

  private fail(err: unknown): void {
    this.lastError =
      err instanceof ApiError
        ? `service error ${err.status}: ${JSON.stringify(err.detail)}`
        : String(err);
    this.emit("error");
  }

  async loadDatasets(): Promise<void> {
    try {
      this.datasets = await this.api.listDatasets();
      this.emit("datasets");
    } catch (err) {
      this.fail(err);
    }
  }

  selectedDataset(): DatasetInfo | null {
    return this.datasets.find((d) => d.name === this.state.dataset) ?? null;
  }

  // -- parameter changes ----------------------------------------------------

  setDataset(name: string, series: string | null = null): void {
    this.state.dataset = name;
    this.state.series = series;
    this.emit("state");
    this.scheduleRun();
  }

  setParam<K extends keyof UiState>(key: K, value: UiState[K]): void {
    if (this.state[key] === value) {
      return;
    }
    this.state[key] = value;
    this.emit("state");
    this.scheduleRun();
  }

  // Aesthetics never touch the pipeline: restyle locally and nothing else.
  setAesthetics(patch: Partial<Aesthetics>): void {
    this.state.aesthetics = { ...this.state.aesthetics, ...patch };
    this.emit("aesthetics");
  }

  setActiveTab(tab: UiState["activeTab"]): void {
    this.state.activeTab = tab;
    this.emit("state");
    if (tab === "logs") {
      void this.refreshLogs();
    }
  }

  // -- pipeline lifecycle ---------------------------------------------------

  scheduleRun(): void {
    if (this.state.dataset === null) {
      return;
    }
    if (this.debounceTimer !== null) {
      clearTimeout(this.debounceTimer);
    }
    this.debounceTimer = setTimeout(() => {
      this.debounceTimer = null;
      void this.launch();
    }, this.debounceMs);
  }

  async launch(): Promise<void> {
    let fingerprint: string;
    let issue: Promise<RunView>;
    try {
      const req = buildRequest(this.state);
      fingerprint = requestFingerprint(req);
      this.pendingFingerprint = fingerprint;
      const existing = this.issued.get(fingerprint);
      if (existing) {
        issue = existing;
      } else {
        issue = this.executeRun(fingerprint, req);
        this.issued.set(fingerprint, issue);
      }
    } catch (err) {
      this.fail(err);
      return;
    }
    this.running = true;
    this.emit("run-started");
    let view: RunView;
    try {
      view = await issue;
    } catch (err) {
      // failed runs may be retried later
      this.issued.delete(fingerprint);
      if (this.pendingFingerprint === fingerprint) {
        this.running = false;
        this.fail(err);
      }
      return;
    }
    if (this.pendingFingerprint !== fingerprint) {
      return; // a newer request superseded this one; drop the result
    }
    this.running = false;
    this.displayEpoch += 1;
    this.current = view;
    this.selection = EMPTY_SELECTION;
    this.emit("run");
    this.emit("selection");
  }

  private async executeRun(
    fingerprint: string,
    req: ReturnType<typeof buildRequest>,
  ): Promise<RunView> {
    const accepted = await this.api.startPipeline(req);
    let summary = await this.api.runStatus(accepted.run_id);
    while (summary.status === "running") {
      await sleep(this.pollIntervalMs);
      summary = await this.api.runStatus(accepted.run_id);
    }
    const display = await this.api.display(accepted.run_id);
    return { fingerprint, runId: accepted.run_id, summary, display };
  }

  // -- linked selection -----------------------------------------------------

  async selectPoints(indices: number[]): Promise<void> {
    if (!this.current) {
      return;
    }
    if (indices.length === 0) {
      this.clearSelection();
      return;
    }
    try {
      const ranges = await this.api.pointsToTime(this.current.runId, indices);
      this.selection = { pointIndices: indices, timeRanges: ranges, origin: "projection" };
      this.emit("selection");
    } catch (err) {
      this.fail(err);
    }
  }

  async selectTime(start: number, end: number): Promise<void> {
    if (!this.current) {
      return;
    }
    try {
      const indices = await this.api.timeToPoints(this.current.runId, start, end);
      this.selection = {
        pointIndices: indices,
        timeRanges: [[start, end]],
        origin: "time",
      };
      this.emit("selection");
    } catch (err) {
      this.fail(err);
    }
  }

  clearSelection(): void {
    this.selection = EMPTY_SELECTION;
    this.emit("selection");
  }

  // -- viewport -------------------------------------------------------------

  // Zoom re-fetches the display slice only; the pipeline result is untouched.
  async zoomTo(start: number, end: number): Promise<void> {
    await this.swapDisplay([start, end]);
  }

  async zoomReset(): Promise<void> {
    await this.swapDisplay(undefined);
  }

  private async swapDisplay(viewport: [number, number] | undefined): Promise<void> {
    if (!this.current) {
      return;
    }
    const epoch = ++this.displayEpoch;
    const run = this.current;
    try {
      const display = await this.api.display(run.runId, viewport);
      if (this.displayEpoch !== epoch || this.current !== run) {
        return; // superseded by a newer zoom or a newer run
      }
      this.current = { ...run, display };
      this.emit("display");
    } catch (err) {
      this.fail(err);
    }
  }

  // -- logs -----------------------------------------------------------------

  async refreshLogs(): Promise<void> {
    try {
      this.logs = await this.api.logs();
      this.emit("logs");
    } catch (err) {
      this.fail(err);
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
