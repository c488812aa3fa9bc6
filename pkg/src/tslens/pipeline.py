"""The six-stage analysis pipeline wired through the reactive cache.

    load (parse + resample) -> windows -> embed -> project -> cluster
    load, project, cluster  -> display

Every stage is pure, so its NodeKey (upstream fingerprints + own params)
fully determines its output and fingerprints can chain without hashing bulk
data. A runner built with ``cache=None`` computes every stage directly,
which the transparency tests compare against cached runs bit for bit.

Exact O(m^2) projection and clustering do not scale to millions of windows,
so the cluster stage runs on a seeded uniform subsample of at most
``cluster_point_cap`` projected points (default 20,000); unsampled points
are labeled -1. The display stage subsamples with the same fixed-seed
permutation, so every displayed point carries a genuine cluster label
whenever display_cap <= cluster_point_cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .cache import NodeKey, ReactiveCache
from .clustering import ClusterLabels, ClusterParams, hdbscan, silhouette_score
from .encoders import EmbeddingMatrix, EncoderConfig, encode_windows
from .errors import InvalidInput
from .fingerprint import fingerprint
from .projection import DRParams, ProjectionMatrix, project
from .series import (
    DISPLAY_CAP_DEFAULT,
    DisplaySeries,
    TimeSeries,
    WindowMatrix,
    downsample_display,
    resample,
    sliding_windows,
)

__all__ = [
    "CLUSTER_POINT_CAP_DEFAULT",
    "SUBSAMPLE_SEED",
    "PipelineParams",
    "PipelineResult",
    "DisplayPayload",
    "PipelineRunner",
    "subsample_indices",
]

CLUSTER_POINT_CAP_DEFAULT = 20_000

# One fixed permutation seed shared by the cluster and display subsamples;
# display indices are a prefix of cluster indices under the same permutation.
SUBSAMPLE_SEED = 0x7A11


@dataclass(frozen=True)
class PipelineParams:
    resample_factor: int = 1
    window: int = 48
    stride: int = 1
    encoder: EncoderConfig = EncoderConfig(variant="identity")
    dr: DRParams = DRParams()
    clustering: Optional[ClusterParams] = None
    cluster_point_cap: int = CLUSTER_POINT_CAP_DEFAULT
    display_cap: int = DISPLAY_CAP_DEFAULT

    def __post_init__(self) -> None:
        if self.resample_factor < 1:
            raise InvalidInput("resample_factor must be >= 1")
        if self.window < 1:
            raise InvalidInput("window must be >= 1")
        if self.stride < 1:
            raise InvalidInput("stride must be >= 1")
        if self.cluster_point_cap < 1:
            raise InvalidInput("cluster_point_cap must be >= 1")
        if self.display_cap < 2 or self.display_cap % 2 != 0:
            raise InvalidInput("display_cap must be an even integer >= 2")


@dataclass(frozen=True)
class PipelineResult:
    series: TimeSeries
    windows: WindowMatrix
    embedding: EmbeddingMatrix
    projection: ProjectionMatrix
    clusters: Optional[ClusterLabels]
    fingerprints: Dict[str, str]
    params: PipelineParams
    dataset_fingerprint: str

    @property
    def m(self) -> int:
        return self.projection.m


@dataclass(frozen=True)
class DisplayPayload:
    """Everything the scatter and time plots need, capped for rendering."""

    series: DisplaySeries
    projection_points: np.ndarray  # (p, 2)
    projection_indices: np.ndarray  # (p,) true window indices
    point_labels: Optional[np.ndarray]  # (p,) or None when clustering is off
    total_points: int
    viewport: Optional[Tuple[int, int]]


def subsample_indices(m: int, cap: int, seed: int = SUBSAMPLE_SEED) -> np.ndarray:
    """Sorted seeded uniform sample of min(m, cap) indices out of m."""
    if m <= cap:
        return np.arange(m, dtype=np.int64)
    perm = np.random.default_rng(seed).permutation(m)
    return np.sort(perm[:cap]).astype(np.int64)


def _slice_series(series: TimeSeries, viewport: Tuple[int, int]) -> TimeSeries:
    start, end = viewport
    if not 0 <= start <= end < series.n:
        raise InvalidInput(
            f"viewport [{start}, {end}] outside series of length {series.n}"
        )
    return TimeSeries(
        timestamps=series.timestamps[start : end + 1],
        values=series.values[start : end + 1],
        channel_names=series.channel_names,
        frequency_seconds=series.frequency_seconds,
    )


class PipelineRunner:
    """Runs stages through a ReactiveCache, or directly when cache is None.

    The dataset fingerprint passed to ``load`` must uniquely identify what
    the loader returns (artifact id plus series name); it is the root of
    every downstream cache key.
    """

    def __init__(self, cache: Optional[ReactiveCache] = None):
        self.cache = cache

    def _memo(self, key: NodeKey, compute: Callable[[], object]):
        if self.cache is None:
            return compute()
        return self.cache.get_or_compute(key, compute)

    def load(
        self,
        loader: Callable[[], TimeSeries],
        dataset_fingerprint: str,
        params: PipelineParams,
    ) -> Tuple[TimeSeries, str]:
        key = NodeKey(
            stage="load",
            input_fingerprints=(dataset_fingerprint,),
            params_fingerprint=fingerprint({"factor": params.resample_factor}),
        )
        series = self._memo(key, lambda: resample(loader(), params.resample_factor))
        return series, key.node_fingerprint()

    def windows(
        self, series: TimeSeries, load_fp: str, params: PipelineParams
    ) -> Tuple[WindowMatrix, str]:
        key = NodeKey(
            stage="windows",
            input_fingerprints=(load_fp,),
            params_fingerprint=fingerprint({"w": params.window, "stride": params.stride}),
        )
        wm = self._memo(key, lambda: sliding_windows(series, params.window, params.stride))
        return wm, key.node_fingerprint()

    def embed(
        self, wm: WindowMatrix, windows_fp: str, params: PipelineParams
    ) -> Tuple[EmbeddingMatrix, str]:
        key = NodeKey(
            stage="embed",
            input_fingerprints=(windows_fp,),
            params_fingerprint=params.encoder.fingerprint_with(
                wm.window_size, wm.stride, wm.channel_count
            ),
        )
        emb = self._memo(key, lambda: encode_windows(wm, params.encoder))
        return emb, key.node_fingerprint()

    def project(
        self, emb: EmbeddingMatrix, embed_fp: str, params: PipelineParams
    ) -> Tuple[ProjectionMatrix, str]:
        key = NodeKey(
            stage="project",
            input_fingerprints=(embed_fp,),
            params_fingerprint=params.dr.fingerprint(),
        )
        proj = self._memo(
            key, lambda: project(emb.data, params.dr, embedding_fingerprint=embed_fp)
        )
        return proj, key.node_fingerprint()

    def cluster(
        self, proj: ProjectionMatrix, project_fp: str, params: PipelineParams
    ) -> Tuple[ClusterLabels, str]:
        if params.clustering is None:
            raise InvalidInput("cluster stage requires clustering params")
        key = NodeKey(
            stage="cluster",
            input_fingerprints=(project_fp,),
            params_fingerprint=fingerprint(
                {"clustering": params.clustering, "cap": params.cluster_point_cap}
            ),
        )

        def compute() -> ClusterLabels:
            idx = subsample_indices(proj.m, params.cluster_point_cap)
            sampled = hdbscan(proj.coords[idx], params.clustering)
            score = None
            if sampled.n_clusters >= 2:
                score = silhouette_score(proj.coords[idx], sampled.labels)
            labels = np.full(proj.m, -1, dtype=np.int64)
            labels[idx] = sampled.labels
            return ClusterLabels(
                labels=labels, n_clusters=sampled.n_clusters, score=score
            )

        clusters = self._memo(key, compute)
        return clusters, key.node_fingerprint()

    def display(
        self,
        result: PipelineResult,
        viewport: Optional[Tuple[int, int]] = None,
    ) -> Tuple[DisplayPayload, str]:
        params = result.params
        if viewport is not None:
            start, end = viewport
            if not 0 <= start <= end < result.series.n:
                raise InvalidInput(
                    f"viewport [{start}, {end}] outside series of length {result.series.n}"
                )
        cluster_fp = result.fingerprints.get("cluster", "")
        key = NodeKey(
            stage="display",
            input_fingerprints=(
                result.fingerprints["load"],
                result.fingerprints["project"],
                cluster_fp,
            ),
            params_fingerprint=fingerprint(
                {
                    "cap": params.display_cap,
                    "viewport": None if viewport is None else list(viewport),
                }
            ),
        )

        def compute() -> DisplayPayload:
            shown = (
                result.series
                if viewport is None
                else _slice_series(result.series, viewport)
            )
            series_display = downsample_display(shown, params.display_cap)
            idx = subsample_indices(result.projection.m, params.display_cap)
            labels = None
            if result.clusters is not None:
                labels = result.clusters.labels[idx].copy()
            return DisplayPayload(
                series=series_display,
                projection_points=result.projection.coords[idx].copy(),
                projection_indices=idx,
                point_labels=labels,
                total_points=result.projection.m,
                viewport=viewport,
            )

        payload = self._memo(key, compute)
        return payload, key.node_fingerprint()

    def run(
        self,
        loader: Callable[[], TimeSeries],
        dataset_fingerprint: str,
        params: PipelineParams,
    ) -> PipelineResult:
        series, load_fp = self.load(loader, dataset_fingerprint, params)
        wm, windows_fp = self.windows(series, load_fp, params)
        emb, embed_fp = self.embed(wm, windows_fp, params)
        proj, project_fp = self.project(emb, embed_fp, params)
        fingerprints = {
            "load": load_fp,
            "windows": windows_fp,
            "embed": embed_fp,
            "project": project_fp,
        }
        clusters = None
        if params.clustering is not None:
            clusters, cluster_fp = self.cluster(proj, project_fp, params)
            fingerprints["cluster"] = cluster_fp
        return PipelineResult(
            series=series,
            windows=wm,
            embedding=emb,
            projection=proj,
            clusters=clusters,
            fingerprints=fingerprints,
            params=params,
            dataset_fingerprint=dataset_fingerprint,
        )
