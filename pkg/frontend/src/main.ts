// Assembles the application DOM and wires controls to the store. Projection
// and series views stay linked through the store's selection; aesthetics
// controls restyle canvases without touching the service.

import type { LogsPayload, RunSummary } from "./api.js";
import { SortableTable } from "./logstable.js";
import { PALETTES, ScatterPlot } from "./scatter.js";
import { boundsFromMetadata } from "./state.js";
import type { SliderBounds } from "./state.js";
import { AppStore } from "./store.js";
import { TimePlot } from "./timeplot.js";

export interface App {
  store: AppStore;
  scatter: ScatterPlot;
  timePlot: TimePlot;
  cacheTable: SortableTable<LogsPayload["cache"]["stages"][number]>;
  runsTable: SortableTable<LogsPayload["runs"][number]>;
  root: HTMLElement;
}

interface SliderSpec {
  id: string;
  label: string;
  bounds: SliderBounds;
  value: number;
  onInput(value: number): void;
}

function slider(doc: Document, spec: SliderSpec): HTMLElement {
  const wrap = doc.createElement("label");
  wrap.className = "control";
  const text = doc.createElement("span");
  text.textContent = spec.label;
  const input = doc.createElement("input");
  input.type = "range";
  input.id = spec.id;
  input.min = String(spec.bounds.min);
  input.max = String(spec.bounds.max);
  input.step = String(spec.bounds.step);
  input.value = String(spec.value);
  const shown = doc.createElement("span");
  shown.className = "value";
  shown.id = spec.id + "-value";
  shown.textContent = input.value;
  input.addEventListener("input", () => {
    shown.textContent = input.value;
    spec.onInput(Number(input.value));
  });
  wrap.append(text, input, shown);
  return wrap;
}

function selectBox(
  doc: Document,
  id: string,
  label: string,
  options: { value: string; label: string }[],
  value: string,
  onChange: (value: string) => void,
): HTMLElement {
  const wrap = doc.createElement("label");
  wrap.className = "control";
  const text = doc.createElement("span");
  text.textContent = label;
  const select = doc.createElement("select");
  select.id = id;
  for (const opt of options) {
    const el = doc.createElement("option");
    el.value = opt.value;
    el.textContent = opt.label;
    select.appendChild(el);
  }
  select.value = value;
  select.addEventListener("change", () => onChange(select.value));
  wrap.append(text, select);
  return wrap;
}

function checkbox(
  doc: Document,
  id: string,
  label: string,
  checked: boolean,
  onChange: (checked: boolean) => void,
): HTMLElement {
  const wrap = doc.createElement("label");
  wrap.className = "control";
  const input = doc.createElement("input");
  input.type = "checkbox";
  input.id = id;
  input.checked = checked;
  input.addEventListener("change", () => onChange(input.checked));
  const text = doc.createElement("span");
  text.textContent = label;
  wrap.append(input, text);
  return wrap;
}

function button(doc: Document, id: string, label: string, onClick: () => void): HTMLButtonElement {
  const el = doc.createElement("button");
  el.id = id;
  el.type = "button";
  el.textContent = label;
  el.addEventListener("click", onClick);
  return el;
}

export function bootstrap(root: HTMLElement, store: AppStore): App {
  const doc = root.ownerDocument;
  root.classList.add("tslens-app");

  const toast = doc.createElement("div");
  toast.id = "toast";
  toast.className = "toast hidden";

  // -- left panel -----------------------------------------------------------

  const panel = doc.createElement("aside");
  panel.className = "panel";

  const datasetSelect = selectBox(doc, "dataset-select", "dataset", [], "", (value) => {
    if (value) {
      store.setDataset(value);
      applyBounds();
    }
  });

  const addSlider = (host: HTMLElement, spec: SliderSpec): void => {
    host.appendChild(slider(doc, spec));
  };

  const s = store.state;
  const initialBounds = boundsFromMetadata({});
  addSlider(panel, {
    id: "resample-slider",
    label: "resample factor",
    bounds: initialBounds.resampleFactor,
    value: s.resampleFactor,
    onInput: (v) => store.setParam("resampleFactor", v),
  });
  addSlider(panel, {
    id: "window-slider",
    label: "window length",
    bounds: initialBounds.window,
    value: s.window,
    onInput: (v) => store.setParam("window", v),
  });
  panel.appendChild(
    selectBox(
      doc,
      "encoder-select",
      "window encoder",
      [
        { value: "identity", label: "identity" },
        { value: "meanpool", label: "mean pooling" },
        { value: "randproj", label: "random projection" },
      ],
      s.encoderVariant,
      (v) => store.setParam("encoderVariant", v as typeof s.encoderVariant),
    ),
  );
  panel.appendChild(
    selectBox(
      doc,
      "algorithm-select",
      "projection",
      [
        { value: "umap", label: "umap" },
        { value: "tsne", label: "t-sne" },
        { value: "pca", label: "pca" },
      ],
      s.algorithm,
      (v) => store.setParam("algorithm", v as typeof s.algorithm),
    ),
  );
  addSlider(panel, {
    id: "n-neighbors-slider",
    label: "neighbors",
    bounds: initialBounds.nNeighbors,
    value: s.nNeighbors,
    onInput: (v) => store.setParam("nNeighbors", v),
  });
  addSlider(panel, {
    id: "min-dist-slider",
    label: "min dist",
    bounds: initialBounds.minDist,
    value: s.minDist,
    onInput: (v) => store.setParam("minDist", v),
  });
  addSlider(panel, {
    id: "random-state-slider",
    label: "random seed",
    bounds: initialBounds.randomState,
    value: s.randomState,
    onInput: (v) => store.setParam("randomState", v),
  });
  panel.appendChild(
    checkbox(doc, "clustering-toggle", "cluster windows", s.clusteringEnabled, (checked) =>
      store.setParam("clusteringEnabled", checked),
    ),
  );
  addSlider(panel, {
    id: "min-cluster-size-slider",
    label: "min cluster size",
    bounds: initialBounds.minClusterSize,
    value: s.minClusterSize,
    onInput: (v) => store.setParam("minClusterSize", v),
  });
  addSlider(panel, {
    id: "min-samples-slider",
    label: "min samples (0 = auto)",
    bounds: { min: 0, max: initialBounds.minSamples.max, step: 1 },
    value: s.minSamples ?? 0,
    onInput: (v) => store.setParam("minSamples", v === 0 ? null : v),
  });

  const aesthetics = doc.createElement("div");
  aesthetics.className = "aesthetics";
  addSlider(aesthetics, {
    id: "alpha-slider",
    label: "opacity",
    bounds: { min: 0.05, max: 1, step: 0.05 },
    value: s.aesthetics.alpha,
    onInput: (v) => store.setAesthetics({ alpha: v }),
  });
  addSlider(aesthetics, {
    id: "point-size-slider",
    label: "point size",
    bounds: { min: 1, max: 12, step: 1 },
    value: s.aesthetics.pointSize,
    onInput: (v) => store.setAesthetics({ pointSize: v }),
  });
  aesthetics.appendChild(
    checkbox(doc, "show-lines-toggle", "connect points", s.aesthetics.showLines, (checked) =>
      store.setAesthetics({ showLines: checked }),
    ),
  );
  aesthetics.appendChild(
    selectBox(
      doc,
      "palette-select",
      "palette",
      Object.keys(PALETTES).map((name) => ({ value: name, label: name })),
      s.aesthetics.palette,
      (v) => store.setAesthetics({ palette: v }),
    ),
  );
  panel.appendChild(aesthetics);
  panel.insertBefore(datasetSelect, panel.firstChild);

  // -- tabs -----------------------------------------------------------------

  const mainArea = doc.createElement("main");
  const tabBar = doc.createElement("nav");
  tabBar.className = "tabs";
  const panes: Record<string, HTMLElement> = {};
  const tabs: [string, string][] = [
    ["projections", "Projections"],
    ["information", "Information"],
    ["logs", "Logs"],
  ];
  for (const [key, label] of tabs) {
    tabBar.appendChild(
      button(doc, `tab-${key}`, label, () => {
        store.setActiveTab(key as "projections" | "information" | "logs");
        for (const [paneKey, pane] of Object.entries(panes)) {
          pane.classList.toggle("hidden", paneKey !== key);
        }
      }),
    );
    const pane = doc.createElement("section");
    pane.id = `pane-${key}`;
    pane.classList.toggle("hidden", key !== "projections");
    panes[key] = pane;
  }
  mainArea.appendChild(tabBar);

  // -- projections pane -----------------------------------------------------

  const projectionsPane = panes["projections"]!;
  const statusLine = doc.createElement("div");
  statusLine.id = "status-line";
  statusLine.textContent = "pick a dataset to start";

  const scatterCanvas = doc.createElement("canvas");
  scatterCanvas.id = "scatter-canvas";
  scatterCanvas.width = 640;
  scatterCanvas.height = 420;
  const timeCanvas = doc.createElement("canvas");
  timeCanvas.id = "time-canvas";
  timeCanvas.width = 640;
  timeCanvas.height = 200;

  const scatter = new ScatterPlot(scatterCanvas);
  const timePlot = new TimePlot(timeCanvas);

  const toolbar = doc.createElement("div");
  toolbar.className = "toolbar";
  toolbar.append(
    button(doc, "zoom-in-btn", "zoom to selection", () => {
      const range = store.selection.timeRanges[0];
      if (range) {
        void store.zoomTo(range[0], range[1]);
      }
    }),
    button(doc, "zoom-reset-btn", "reset zoom", () => {
      void store.zoomReset();
    }),
    button(doc, "clear-selection-btn", "clear selection", () => store.clearSelection()),
    button(doc, "download-btn", "download plot", () => {
      const url = scatter.imageDataUrl();
      if (!url) {
        return;
      }
      const link = doc.createElement("a");
      link.href = url;
      link.download = "projection.png";
      link.click();
    }),
  );

  projectionsPane.append(statusLine, toolbar, scatterCanvas, timeCanvas);

  // -- information pane -----------------------------------------------------

  const infoPane = panes["information"]!;
  const infoList = doc.createElement("dl");
  infoList.id = "run-info";
  infoPane.appendChild(infoList);

  const renderInfo = (summary: RunSummary | null): void => {
    infoList.textContent = "";
    if (!summary) {
      const dd = doc.createElement("dd");
      dd.textContent = "no completed run";
      infoList.appendChild(dd);
      return;
    }
    const rows: [string, string][] = [
      ["run id", summary.run_id],
      ["status", summary.status],
      ["windows", String(summary.m ?? "")],
      ["series elements", String(summary.elements ?? "")],
      ["window length", String(summary.window ?? "")],
      ["stride", String(summary.stride ?? "")],
    ];
    if (summary.clustering) {
      rows.push(["clusters", String(summary.n_clusters ?? "")]);
      rows.push(["silhouette", (summary.silhouette ?? 0).toFixed(4)]);
    }
    for (const [stage, fp] of Object.entries(summary.fingerprints ?? {})) {
      rows.push([`fingerprint ${stage}`, fp.slice(0, 16)]);
    }
    for (const [label, value] of rows) {
      const dt = doc.createElement("dt");
      dt.textContent = label;
      const dd = doc.createElement("dd");
      dd.textContent = value;
      infoList.append(dt, dd);
    }
  };
  renderInfo(null);

  // -- logs pane ------------------------------------------------------------

  const logsPane = panes["logs"]!;
  const cacheTable = new SortableTable<LogsPayload["cache"]["stages"][number]>(doc, [
    { key: "stage", label: "stage", value: (r) => r.stage },
    { key: "compute_count", label: "computes", value: (r) => r.compute_count },
    { key: "hit_count", label: "hits", value: (r) => r.hit_count },
    { key: "last_compute_duration", label: "seconds", value: (r) => r.last_compute_duration },
  ]);
  cacheTable.element.id = "cache-table";
  const runsTable = new SortableTable<LogsPayload["runs"][number]>(doc, [
    { key: "factor", label: "factor", value: (r) => r.factor },
    { key: "stage", label: "stage", value: (r) => r.stage },
    { key: "elements", label: "elements", value: (r) => r.elements },
    { key: "wall_seconds", label: "seconds", value: (r) => r.wall_seconds },
    { key: "compute_count", label: "computes", value: (r) => r.compute_count },
    { key: "error", label: "error", value: (r) => r.error },
  ]);
  runsTable.element.id = "runs-table";
  const cacheSummary = doc.createElement("div");
  cacheSummary.id = "cache-summary";
  logsPane.append(
    button(doc, "logs-refresh-btn", "refresh", () => {
      void store.refreshLogs();
    }),
    cacheSummary,
    cacheTable.element,
    runsTable.element,
  );

  for (const pane of Object.values(panes)) {
    mainArea.appendChild(pane);
  }
  root.append(panel, mainArea, toast);

  // -- store wiring ---------------------------------------------------------

  const applyBounds = (): void => {
    const meta = store.selectedDataset()?.metadata ?? {};
    const bounds = boundsFromMetadata(meta);
    const apply = (id: string, b: SliderBounds): void => {
      const input = doc.getElementById(id) as HTMLInputElement | null;
      if (input) {
        input.min = String(b.min);
        input.max = String(b.max);
        input.step = String(b.step);
      }
    };
    apply("window-slider", bounds.window);
    apply("resample-slider", bounds.resampleFactor);
    apply("n-neighbors-slider", bounds.nNeighbors);
    apply("min-dist-slider", bounds.minDist);
    apply("random-state-slider", bounds.randomState);
    apply("min-cluster-size-slider", bounds.minClusterSize);
  };

  store.on("datasets", () => {
    const select = doc.getElementById("dataset-select") as HTMLSelectElement;
    select.textContent = "";
    const placeholder = doc.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "choose dataset";
    select.appendChild(placeholder);
    for (const d of store.datasets) {
      const opt = doc.createElement("option");
      opt.value = d.name;
      opt.textContent = `${d.name}@${d.version}`;
      select.appendChild(opt);
    }
    select.value = store.state.dataset ?? "";
  });

  store.on("run-started", () => {
    statusLine.textContent = "running…";
  });

  const renderDisplay = (): void => {
    const view = store.current;
    if (!view) {
      return;
    }
    const display = view.display;
    scatter.setData(
      display.projection.points,
      display.projection.indices,
      display.projection.labels,
    );
    scatter.setStyle(store.state.aesthetics);
    const viewport: [number, number] = display.viewport ?? [
      0,
      Math.max(0, display.series.source_length - 1),
    ];
    timePlot.setData(display.series.channels, viewport);
    timePlot.setShadedRanges(store.selection.timeRanges);
  };

  store.on("run", () => {
    const view = store.current;
    statusLine.textContent = view
      ? `run ${view.runId} done: ${view.summary.m} windows`
      : "";
    renderDisplay();
    renderInfo(view?.summary ?? null);
  });

  store.on("display", renderDisplay);

  store.on("selection", () => {
    scatter.setHighlight(store.selection.pointIndices);
    timePlot.setShadedRanges(store.selection.timeRanges);
  });

  store.on("aesthetics", () => {
    scatter.setStyle(store.state.aesthetics);
  });

  store.on("logs", () => {
    const logs = store.logs;
    if (!logs) {
      return;
    }
    cacheSummary.textContent =
      `cache entries: ${logs.cache.entries}, ` +
      `budget bytes: ${logs.cache.budget_bytes}`;
    cacheTable.setRows(logs.cache.stages);
    runsTable.setRows(logs.runs);
  });

  store.on("error", () => {
    toast.textContent = store.lastError ?? "unknown error";
    toast.classList.remove("hidden");
    statusLine.textContent = "error";
  });

  scatter.onBrush = (indices) => {
    void store.selectPoints(indices);
  };
  timePlot.onRangeSelect = (start, end) => {
    void store.selectTime(start, end);
  };

  void store.loadDatasets();

  return { store, scatter, timePlot, cacheTable, runsTable, root };
}
