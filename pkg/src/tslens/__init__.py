"""tslens: scalable visual analytics for large time series.

Pipeline: ingest -> resample -> sliding windows -> encode -> 2-D projection
-> density clustering -> capped display, with a dependency-tracked cache so
a parameter change recomputes exactly the affected stages.
"""

from .artifacts import Artifact, ArtifactStore
from .cache import NodeKey, ReactiveCache
from .clustering import ClusterLabels, ClusterParams, hdbscan, silhouette_score
from .encoders import EmbeddingMatrix, EncoderConfig, encode_windows
from .pipeline import PipelineParams, PipelineResult, PipelineRunner
from .projection import DRParams, ProjectionMatrix, project
from .series import (
    DisplaySeries,
    TimeSeries,
    WindowMatrix,
    downsample_display,
    point_indices_for_time,
    resample,
    sliding_windows,
    window_range_for_point,
)

__version__ = "0.1.0"

__all__ = [
    "Artifact",
    "ArtifactStore",
    "ClusterLabels",
    "ClusterParams",
    "DRParams",
    "DisplaySeries",
    "EmbeddingMatrix",
    "EncoderConfig",
    "NodeKey",
    "PipelineParams",
    "PipelineResult",
    "PipelineRunner",
    "ProjectionMatrix",
    "ReactiveCache",
    "TimeSeries",
    "WindowMatrix",
    "downsample_display",
    "encode_windows",
    "hdbscan",
    "point_indices_for_time",
    "project",
    "resample",
    "silhouette_score",
    "sliding_windows",
    "window_range_for_point",
    "__version__",
]
