// UI state and its mapping onto pipeline requests. Aesthetics live in a
// separate sub-object: changing them must never alter the derived request.

import type { PipelineRequest } from "./api.js";

export interface Aesthetics {
  alpha: number;
  pointSize: number;
  showLines: boolean;
  palette: string;
}

export interface UiState {
  dataset: string | null;
  series: string | null;
  resampleFactor: number;
  window: number;
  encoderVariant: "identity" | "meanpool" | "randproj";
  encoderPool: number;
  encoderDims: number;
  encoderSeed: number;
  algorithm: "pca" | "umap" | "tsne";
  nNeighbors: number;
  minDist: number;
  randomState: number;
  clusteringEnabled: boolean;
  minClusterSize: number;
  minSamples: number | null;
  aesthetics: Aesthetics;
  activeTab: "projections" | "information" | "logs";
}

export function defaultState(): UiState {
  return {
    dataset: null,
    series: null,
    resampleFactor: 1,
    window: 48,
    encoderVariant: "identity",
    encoderPool: 4,
    encoderDims: 16,
    encoderSeed: 0,
    algorithm: "umap",
    nNeighbors: 15,
    minDist: 0.1,
    randomState: 0,
    clusteringEnabled: true,
    minClusterSize: 5,
    minSamples: null,
    aesthetics: { alpha: 0.8, pointSize: 4, showLines: false, palette: "classic" },
    activeTab: "projections",
  };
}

export interface SliderBounds {
  min: number;
  max: number;
  step: number;
}

export interface PanelBounds {
  window: SliderBounds;
  resampleFactor: SliderBounds;
  nNeighbors: SliderBounds;
  minDist: SliderBounds;
  randomState: SliderBounds;
  minClusterSize: SliderBounds;
  minSamples: SliderBounds;
}

// Slider limits derive from the selected dataset artifact's metadata so the
// panel cannot request windows longer than the series itself.
export function boundsFromMetadata(metadata: Record<string, string>): PanelBounds {
  const rows = Number.parseInt(metadata["rows"] ?? "0", 10) || 2;
  const maxWindow = Math.max(2, Math.min(512, rows));
  const maxFactor = Math.max(1, Math.floor(rows / 2));
  return {
    window: { min: 2, max: maxWindow, step: 1 },
    resampleFactor: { min: 1, max: Math.min(500, maxFactor), step: 1 },
    nNeighbors: { min: 2, max: 100, step: 1 },
    minDist: { min: 0.0, max: 0.99, step: 0.01 },
    randomState: { min: 0, max: 9999, step: 1 },
    minClusterSize: { min: 2, max: 200, step: 1 },
    minSamples: { min: 1, max: 200, step: 1 },
  };
}

export function buildRequest(state: UiState): PipelineRequest {
  if (state.dataset === null) {
    throw new Error("no dataset selected");
  }
  const req: PipelineRequest = {
    dataset: state.dataset,
    resample_factor: state.resampleFactor,
    window: state.window,
    stride: 1,
    encoder: {
      variant: state.encoderVariant,
      pool: state.encoderPool,
      dims: state.encoderDims,
      seed: state.encoderSeed,
      chunk_size: 8192,
    },
    dr: {
      algorithm: state.algorithm,
      n_neighbors: state.nNeighbors,
      min_dist: state.minDist,
      random_state: state.randomState,
      pca_pre_dims: 50,
      tsne_perplexity: 30.0,
    },
    clustering: state.clusteringEnabled
      ? { min_cluster_size: state.minClusterSize, min_samples: state.minSamples }
      : null,
    threads: "1",
  };
  if (state.series !== null) {
    req.series = state.series;
  }
  return req;
}

function stableStringify(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return JSON.stringify(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(stableStringify).join(",") + "]";
  }
  const entries = Object.entries(value as Record<string, unknown>)
    .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
    .map(([k, v]) => JSON.stringify(k) + ":" + stableStringify(v));
  return "{" + entries.join(",") + "}";
}

// Key-order independent identity for a request; two UI states that map to the
// same request share one fingerprint and therefore one pipeline submission.
export function requestFingerprint(req: PipelineRequest): string {
  return stableStringify(req);
}
