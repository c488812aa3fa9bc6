"""Projection quality metrics."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput
from ._common import KTooLarge, check_finite_matrix, pairwise_sq_distances

__all__ = ["trustworthiness"]


def trustworthiness(X: np.ndarray, Y: np.ndarray, k: int) -> float:
    """How well the low-dimensional neighbourhoods respect the original ones.

    T(k) = 1 - 2/(m*k*(2m-3k-1)) * sum_i sum_{j in U_i} (r(i,j) - k), where
    U_i holds the k nearest neighbours of i in Y that are not among the k
    nearest in X, and r(i,j) is j's neighbour rank around i in X (nearest
    point has rank 1). 1.0 means every projected neighbourhood is genuine.
    """
    X = check_finite_matrix(X, "trustworthiness X")
    Y = check_finite_matrix(Y, "trustworthiness Y")
    m = X.shape[0]
    if Y.shape[0] != m:
        raise InvalidInput(f"row mismatch: X has {m}, Y has {Y.shape[0]}")
    if k < 1:
        raise InvalidInput("k must be >= 1")
    if not k < m / 2:
        raise KTooLarge(f"trustworthiness needs k < m/2, got k={k} m={m}")

    dx = pairwise_sq_distances(X, X)
    dy = pairwise_sq_distances(Y, Y)
    np.fill_diagonal(dx, np.inf)
    np.fill_diagonal(dy, np.inf)
    order_x = np.argsort(dx, axis=1, kind="stable")
    order_y = np.argsort(dy, axis=1, kind="stable")

    # rank_x[i, j] = 1-based neighbour rank of j around i in X
    rank_x = np.empty((m, m), dtype=np.int64)
    cols = np.arange(m)
    for i in range(m):
        rank_x[i, order_x[i]] = cols + 1

    total = 0
    for i in range(m):
        in_x = set(order_x[i, :k].tolist())
        for j in order_y[i, :k]:
            if int(j) not in in_x:
                total += rank_x[i, j] - k
    return 1.0 - (2.0 / (m * k * (2 * m - 3 * k - 1))) * total
