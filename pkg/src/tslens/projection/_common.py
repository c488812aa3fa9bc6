"""Shared pieces for the projection algorithms: errors and exact k-NN."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput, NaNInput

__all__ = [
    "TooFewPoints",
    "TooManyPoints",
    "KTooLarge",
    "check_finite_matrix",
    "knn_euclidean",
    "pairwise_sq_distances",
]


class TooFewPoints(InvalidInput):
    pass


class TooManyPoints(InvalidInput):
    pass


class KTooLarge(InvalidInput):
    pass


def check_finite_matrix(X: np.ndarray, what: str = "input") -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidInput(f"{what} must be a 2-D matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise NaNInput(f"{what} contains NaN or infinite values")
    return X


def pairwise_sq_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between rows of A and rows of B."""
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = np.einsum("ij,ij->i", B, B)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def knn_euclidean(X: np.ndarray, k: int, block: int = 2048):
    """Exact k nearest neighbours of every row, self excluded.

    Returns (indices, distances), both (m, k), sorted by ascending distance
    with index as the tie-break. Rows are processed in fixed-size blocks so
    memory stays at block * m floats. Distances are computed on column-
    centered data; centering leaves them unchanged but avoids the
    cancellation that would make neighbour order drift under large
    coordinate offsets.
    """
    m = X.shape[0]
    if k < 1 or k >= m:
        raise TooFewPoints(f"need 1 <= k < m, got k={k} m={m}")
    Xc = X - X.mean(axis=0)
    indices = np.empty((m, k), dtype=np.int64)
    distances = np.empty((m, k), dtype=np.float64)
    for start in range(0, m, block):
        stop = min(start + block, m)
        d2 = pairwise_sq_distances(Xc[start:stop], Xc)
        rows = np.arange(stop - start)
        d2[rows, np.arange(start, stop)] = np.inf
        part = np.argpartition(d2, k - 1, axis=1)[:, :k]
        part_d = np.take_along_axis(d2, part, axis=1)
        # lexsort on (index, distance): stable ascending distance, then index
        order = np.lexsort((part, part_d), axis=1)
        indices[start:stop] = np.take_along_axis(part, order, axis=1)
        distances[start:stop] = np.sqrt(np.take_along_axis(part_d, order, axis=1))
    return indices, distances
