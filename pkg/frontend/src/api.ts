// Typed client for the tslens HTTP service. All access to analytics results
// goes through these endpoints; the UI never computes pipeline stages itself.

export interface EncoderRequest {
  variant: "identity" | "meanpool" | "randproj";
  pool: number;
  dims: number;
  seed: number;
  chunk_size: number;
}

export interface DrRequest {
  algorithm: "pca" | "umap" | "tsne";
  n_neighbors: number;
  min_dist: number;
  random_state: number;
  pca_pre_dims: number;
  tsne_perplexity: number;
}

export interface ClusterRequest {
  min_cluster_size: number;
  min_samples: number | null;
}

export interface PipelineRequest {
  dataset: string;
  series?: string;
  resample_factor: number;
  window: number;
  stride: number;
  encoder: EncoderRequest;
  dr: DrRequest;
  clustering: ClusterRequest | null;
  threads: "1" | "auto";
}

export interface RunAccepted {
  run_id: string;
  status: string;
}

export interface RunSummary {
  run_id: string;
  status: "running" | "done" | "error";
  request: unknown;
  m?: number;
  elements?: number;
  window?: number;
  stride?: number;
  fingerprints?: Record<string, string>;
  clustering?: boolean;
  n_clusters?: number;
  silhouette?: number;
}

export interface DisplayChannel {
  name: string;
  timestamps: number[];
  values: (number | null)[];
}

export interface DisplayPayload {
  run_id: string;
  viewport: [number, number] | null;
  fingerprints: Record<string, string>;
  series: {
    cap: number;
    source_length: number;
    channels: DisplayChannel[];
  };
  projection: {
    total_points: number;
    indices: number[];
    points: [number, number][];
    labels: number[] | null;
  };
}

export interface SelectionRangesResponse {
  ranges: [number, number][];
}

export interface SelectionIndicesResponse {
  indices: number[];
}

export interface CacheStageStats {
  stage: string;
  compute_count: number;
  hit_count: number;
  last_compute_duration: number;
}

export interface LogsPayload {
  cache: {
    budget_bytes: number;
    entries: number;
    stages: CacheStageStats[];
  };
  runs: {
    factor: number;
    stage: string;
    elements: number;
    wall_seconds: number;
    compute_count: number;
    error: string | null;
  }[];
}

export interface DatasetInfo {
  id: string;
  kind: string;
  name: string;
  version: number;
  metadata: Record<string, string>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(`service responded ${status}: ${JSON.stringify(detail)}`);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseJson(resp: Response): Promise<unknown> {
  const text = await resp.text();
  try {
    return text ? JSON.parse(text) : null;
  } catch {
    return text;
  }
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await parseJson(resp);
    if (!resp.ok) {
      const detail =
        body && typeof body === "object" && "detail" in body
          ? (body as { detail: unknown }).detail
          : body;
      throw new ApiError(resp.status, detail);
    }
    return body;
  }

  async listDatasets(): Promise<DatasetInfo[]> {
    return (await this.request("/datasets")) as DatasetInfo[];
  }

  async startPipeline(req: PipelineRequest): Promise<RunAccepted> {
    return (await this.request("/pipeline", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(req),
    })) as RunAccepted;
  }

  async runStatus(runId: string): Promise<RunSummary> {
    return (await this.request(`/pipeline/${runId}`)) as RunSummary;
  }

  async display(runId: string, viewport?: [number, number]): Promise<DisplayPayload> {
    const query =
      viewport === undefined ? "" : `?start=${viewport[0]}&end=${viewport[1]}`;
    return (await this.request(`/pipeline/${runId}/display${query}`, {
      headers: { accept: "application/json" },
    })) as DisplayPayload;
  }

  async pointsToTime(runId: string, indices: number[]): Promise<[number, number][]> {
    const body = (await this.request(`/pipeline/${runId}/selection`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ direction: "points_to_time", indices }),
    })) as SelectionRangesResponse;
    return body.ranges;
  }

  async timeToPoints(runId: string, start: number, end: number): Promise<number[]> {
    const body = (await this.request(`/pipeline/${runId}/selection`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ direction: "time_to_points", start, end }),
    })) as SelectionIndicesResponse;
    return body.indices;
  }

  async logs(): Promise<LogsPayload> {
    return (await this.request("/logs")) as LogsPayload;
  }
}
