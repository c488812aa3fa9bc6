"""Exact principal component analysis via singular value decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput
from ._common import check_finite_matrix

__all__ = ["PCAResult", "pca"]


@dataclass(frozen=True)
class PCAResult:
    """Scores (m, k), components (k, d) row-orthonormal, variances descending."""

    scores: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray


def pca(X: np.ndarray, k: int) -> PCAResult:
    """Project onto the top-k principal axes of the column-centered data.

    Explained variances use the sample (1/(m-1)) normalisation. Sign rule:
    the largest-magnitude loading of each component is positive, which pins
    down the otherwise arbitrary eigenvector signs.
    """
    X = check_finite_matrix(X, "pca input")
    m, d = X.shape
    if m < 2:
        raise DegenerateInput(f"pca needs at least 2 rows, got {m}")
    if not 1 <= k <= min(m, d):
        raise DegenerateInput(f"pca target dims {k} outside [1, min(m, d)={min(m, d)}]")
    centered = X - X.mean(axis=0)
    _, singular, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:k].copy()
    for i in range(k):
        j = int(np.argmax(np.abs(components[i])))
        if components[i, j] < 0.0:
            components[i] = -components[i]
    scores = centered @ components.T
    explained = (singular[:k] ** 2) / (m - 1)
    return PCAResult(scores=scores, components=components, explained_variance=explained)
