"""2-D projection of window embeddings.

Four algorithms behind one dispatch: exact PCA, UMAP, exact t-SNE, and the
composite that runs PCA down to ``pca_pre_dims`` dimensions before UMAP.
All are deterministic given ``DRParams.random_state``; execution is
single-threaded wherever parallelism could change bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidInput, NaNInput
from ..fingerprint import fingerprint
from ._common import (
    KTooLarge,
    TooFewPoints,
    TooManyPoints,
    check_finite_matrix,
    knn_euclidean,
)
from .metrics import trustworthiness
from .pca import PCAResult, pca
from .tsne import TSNE_MAX_POINTS, tsne
from .umap import umap

__all__ = [
    "ALGORITHMS",
    "DRParams",
    "ProjectionMatrix",
    "project",
    "pca",
    "PCAResult",
    "umap",
    "tsne",
    "TSNE_MAX_POINTS",
    "trustworthiness",
    "knn_euclidean",
    "TooFewPoints",
    "TooManyPoints",
    "KTooLarge",
]

ALGORITHMS = ("umap", "tsne", "pca", "pca_then_umap")


@dataclass(frozen=True)
class DRParams:
    """Projection algorithm selection plus its tuning knobs.

    Data-dependent preconditions (n_neighbors < m, perplexity < (m-1)/3)
    are enforced where the data is known, at call time.
    """

    algorithm: str = "umap"
    n_neighbors: int = 15
    min_dist: float = 0.1
    random_state: int = 0
    pca_pre_dims: int = 50
    tsne_perplexity: float = 30.0

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise InvalidInput(f"unknown projection algorithm {self.algorithm!r}")
        if self.n_neighbors < 2:
            raise InvalidInput("n_neighbors must be >= 2")
        if not 0.0 <= self.min_dist < 1.0:
            raise InvalidInput("min_dist must lie in [0, 1)")
        if not 0 <= self.random_state < 2**64:
            raise InvalidInput("random_state must be an unsigned 64-bit integer")
        if self.pca_pre_dims < 1:
            raise InvalidInput("pca_pre_dims must be >= 1")
        if self.tsne_perplexity <= 0.0:
            raise InvalidInput("tsne_perplexity must be positive")

    def fingerprint(self) -> str:
        return fingerprint(self)


@dataclass(frozen=True)
class ProjectionMatrix:
    """Row i holds the 2-D coordinates of window i."""

    coords: np.ndarray
    params_fingerprint: str

    def __post_init__(self) -> None:
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise InvalidInput(f"projection coords must be (m, 2), got {self.coords.shape}")
        if not np.isfinite(self.coords).all():
            raise NaNInput("projection coords contain NaN or infinite values")

    @property
    def m(self) -> int:
        return self.coords.shape[0]


def project(X: np.ndarray, params: DRParams, embedding_fingerprint: str = "") -> ProjectionMatrix:
    """Dispatch on params.algorithm; composite runs PCA first, then UMAP."""
    X = check_finite_matrix(X, "projection input")
    if params.algorithm == "pca":
        coords = pca(X, 2).scores
    elif params.algorithm == "umap":
        coords = umap(X, params)
    elif params.algorithm == "tsne":
        coords = tsne(X, params)
    else:
        pre_dims = min(params.pca_pre_dims, X.shape[0], X.shape[1])
        reduced = pca(X, pre_dims).scores
        coords = umap(reduced, params)
    return ProjectionMatrix(
        coords=np.ascontiguousarray(coords, dtype=np.float64),
        params_fingerprint=fingerprint(
            {"dr": params, "embedding": embedding_fingerprint}
        ),
    )
