"""Density-based clustering of 2-D projections and silhouette scoring.

The clusterer follows the standard mutual-reachability construction:

1.  Core distance of a point = distance to its min_samples-th nearest
    non-self neighbour (clamped to the farthest available neighbour when
    min_samples >= m).
2.  Mutual-reachability distance between a and b =
    max(core(a), core(b), d(a, b)).
3.  Exact minimum spanning tree over the implicit complete
    mutual-reachability graph (Prim, O(m^2), distances computed on the fly
    so no m x m matrix is materialised). Ties break on
    (distance, lower index pair), making the tree deterministic.
4.  Single-linkage dendrogram from the sorted MST edges.
5.  Condensation: children smaller than min_cluster_size fall out of their
    parent as single points at lambda = 1/distance.
6.  Excess-of-mass selection: a cluster is kept unless the summed stability
    of its child clusters exceeds its own; the root is never selectable.

Labels are dense {-1, 0, .., n_clusters-1} with -1 for noise, numbered in
condensed-tree breadth-first order so identical input yields identical
labels.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .errors import InvalidInput, NaNInput
from .projection._common import knn_euclidean, pairwise_sq_distances

__all__ = [
    "ClusterParams",
    "ClusterLabels",
    "FewerThanTwoClusters",
    "hdbscan",
    "silhouette_score",
    "core_distances",
    "minimum_spanning_tree",
]


class FewerThanTwoClusters(InvalidInput):
    pass


@dataclass(frozen=True)
class ClusterParams:
    """min_samples defaults to min_cluster_size when left unset."""

    min_cluster_size: int = 5
    min_samples: Optional[int] = None
    cluster_selection: str = "excess-of-mass"

    def __post_init__(self) -> None:
        if self.min_cluster_size < 2:
            raise InvalidInput("min_cluster_size must be >= 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise InvalidInput("min_samples must be >= 1")
        if self.cluster_selection != "excess-of-mass":
            raise InvalidInput(
                f"unsupported cluster_selection {self.cluster_selection!r}"
            )

    @property
    def effective_min_samples(self) -> int:
        return self.min_cluster_size if self.min_samples is None else self.min_samples


@dataclass(frozen=True)
class ClusterLabels:
    labels: np.ndarray
    n_clusters: int
    score: Optional[float] = None

    def __post_init__(self) -> None:
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        distinct = set(labels.tolist())
        distinct.discard(-1)
        if distinct != set(range(self.n_clusters)):
            raise InvalidInput("labels must be -1 or dense 0..n_clusters-1")
        if self.score is not None and not -1.0 <= self.score <= 1.0:
            raise InvalidInput("score must lie in [-1, 1]")


def _check_points(P: np.ndarray) -> np.ndarray:
    P = np.ascontiguousarray(P, dtype=np.float64)
    if P.ndim != 2:
        raise InvalidInput(f"points must form a 2-D matrix, got shape {P.shape}")
    if not np.isfinite(P).all():
        raise NaNInput("points contain NaN or infinite values")
    return P


def core_distances(P: np.ndarray, min_samples: int) -> np.ndarray:
    """Distance from each point to its min_samples-th non-self neighbour."""
    P = _check_points(P)
    m = P.shape[0]
    if m < 2:
        return np.zeros(m)
    k = min(min_samples, m - 1)
    _, dist = knn_euclidean(P, k)
    return dist[:, k - 1].copy()


@njit(cache=True)
def _prim_mst(points, core):
    m = points.shape[0]
    dim = points.shape[1]
    in_tree = np.zeros(m, dtype=np.bool_)
    best_dist = np.full(m, np.inf)
    best_source = np.full(m, -1, dtype=np.int64)
    edges = np.empty((m - 1, 3))
    in_tree[0] = True
    current = 0
    for step in range(m - 1):
        current_core = core[current]
        for j in range(m):
            if in_tree[j]:
                continue
            d2 = 0.0
            for c in range(dim):
                diff = points[current, c] - points[j, c]
                d2 += diff * diff
            reach = np.sqrt(d2)
            if current_core > reach:
                reach = current_core
            if core[j] > reach:
                reach = core[j]
            # strict < keeps the earliest (lowest-index) source on ties
            if reach < best_dist[j]:
                best_dist[j] = reach
                best_source[j] = current
        chosen = -1
        chosen_dist = np.inf
        for j in range(m):
            if not in_tree[j] and best_dist[j] < chosen_dist:
                chosen_dist = best_dist[j]
                chosen = j
        edges[step, 0] = chosen_dist
        edges[step, 1] = best_source[chosen]
        edges[step, 2] = chosen
        in_tree[chosen] = True
        current = chosen
    return edges


def minimum_spanning_tree(P: np.ndarray, min_samples: int) -> np.ndarray:
    """MST edges over mutual-reachability distances, rows (weight, a, b),
    sorted ascending by (weight, lower endpoint, higher endpoint)."""
    P = _check_points(P)
    core = core_distances(P, min_samples)
    edges = _prim_mst(P, core)
    lo = np.minimum(edges[:, 1], edges[:, 2])
    hi = np.maximum(edges[:, 1], edges[:, 2])
    order = np.lexsort((hi, lo, edges[:, 0]))
    out = np.empty_like(edges)
    out[:, 0] = edges[order, 0]
    out[:, 1] = lo[order]
    out[:, 2] = hi[order]
    return out


def _single_linkage(sorted_edges: np.ndarray, m: int) -> np.ndarray:
    """Scipy-style linkage rows (left, right, distance, size); merged node
    ids start at m in merge order."""
    parent = np.arange(2 * m - 1, dtype=np.int64)
    size = np.ones(2 * m - 1, dtype=np.int64)

    def find(x: int) -> int:
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    rows = np.empty((m - 1, 4))
    for idx in range(m - 1):
        weight, a, b = sorted_edges[idx]
        ra, rb = find(int(a)), find(int(b))
        merged = m + idx
        rows[idx] = (ra, rb, weight, size[ra] + size[rb])
        parent[ra] = parent[rb] = merged
        size[merged] = size[ra] + size[rb]
    return rows


def _leaf_points(node: int, linkage: np.ndarray, m: int) -> list:
    stack = [node]
    leaves = []
    while stack:
        v = stack.pop()
        if v < m:
            leaves.append(v)
        else:
            stack.append(int(linkage[v - m, 0]))
            stack.append(int(linkage[v - m, 1]))
    return leaves


def _condense(linkage: np.ndarray, m: int, min_cluster_size: int):
    """Rows (parent, child, lambda, size); cluster ids start at m (root)."""

    def node_size(v: int) -> int:
        return 1 if v < m else int(linkage[v - m, 3])

    root = 2 * m - 2
    rows = []
    next_label = m + 1
    queue = deque([(root, m)])
    while queue:
        node, cluster = queue.popleft()
        left, right, dist, _ = linkage[node - m]
        left, right = int(left), int(right)
        lam = 1.0 / dist if dist > 0.0 else math.inf
        big_left = node_size(left) >= min_cluster_size
        big_right = node_size(right) >= min_cluster_size
        if big_left and big_right:
            for side in (left, right):
                rows.append((cluster, next_label, lam, node_size(side)))
                queue.append((side, next_label))
                next_label += 1
        elif big_left:
            for p in _leaf_points(right, linkage, m):
                rows.append((cluster, p, lam, 1))
            queue.append((left, cluster))
        elif big_right:
            for p in _leaf_points(left, linkage, m):
                rows.append((cluster, p, lam, 1))
            queue.append((right, cluster))
        else:
            for side in (left, right):
                for p in _leaf_points(side, linkage, m):
                    rows.append((cluster, p, lam, 1))
    return rows


def _select_excess_of_mass(rows, m: int):
    """Stability-based flat selection over the condensed tree; returns the
    chosen cluster ids in ascending order."""
    birth = {m: 0.0}
    children_of = {m: []}
    for parent, child, lam, _ in rows:
        if child >= m:
            birth[child] = lam
            children_of.setdefault(child, [])
            children_of[parent].append(child)
    stability = {c: 0.0 for c in birth}
    for parent, child, lam, size in rows:
        gap = lam - birth[parent]
        if math.isnan(gap):  # inf - inf: born and dissolved at distance 0
            gap = 0.0
        stability[parent] += gap * size
    selectable = [c for c in sorted(birth) if c != m]
    keep = {c: True for c in selectable}
    for c in sorted(selectable, reverse=True):
        child_sum = sum(stability[ch] for ch in children_of[c])
        if children_of[c] and child_sum > stability[c]:
            keep[c] = False
            stability[c] = child_sum
        else:
            pending = deque(children_of[c])
            while pending:
                d = pending.popleft()
                keep[d] = False
                pending.extend(children_of[d])
    return [c for c in selectable if keep[c]]


def hdbscan(P: np.ndarray, params: ClusterParams) -> ClusterLabels:
    """Cluster rows of P; label -1 marks noise."""
    P = _check_points(P)
    m = P.shape[0]
    if m < 1:
        raise InvalidInput("need at least one point")
    if m < params.min_cluster_size:
        return ClusterLabels(labels=np.full(m, -1, dtype=np.int64), n_clusters=0)

    edges = minimum_spanning_tree(P, params.effective_min_samples)
    linkage = _single_linkage(edges, m)
    rows = _condense(linkage, m, params.min_cluster_size)
    selected = _select_excess_of_mass(rows, m)
    selected_set = set(selected)
    label_of = {c: i for i, c in enumerate(selected)}

    parent_of = {}
    point_parent = {}
    for parent, child, _, _ in rows:
        if child >= m:
            parent_of[child] = parent
        else:
            point_parent[child] = parent

    resolved = {}

    def resolve(cluster: int) -> int:
        if cluster in resolved:
            return resolved[cluster]
        if cluster in selected_set:
            result = label_of[cluster]
        elif cluster == m:
            result = -1
        else:
            result = resolve(parent_of[cluster])
        resolved[cluster] = result
        return result

    labels = np.full(m, -1, dtype=np.int64)
    for point, parent in point_parent.items():
        labels[point] = resolve(parent)
    return ClusterLabels(labels=labels, n_clusters=len(selected))


def silhouette_score(P: np.ndarray, labels: np.ndarray) -> float:
    """Mean silhouette over non-noise points; singleton clusters score 0."""
    P = _check_points(P)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if labels.shape != (P.shape[0],):
        raise InvalidInput("labels must be one integer per point")
    mask = labels >= 0
    points = P[mask]
    kept = labels[mask]
    cluster_ids, dense = np.unique(kept, return_inverse=True)
    if cluster_ids.size < 2:
        raise FewerThanTwoClusters(
            f"silhouette needs >= 2 clusters, got {cluster_ids.size}"
        )
    n = points.shape[0]
    k = cluster_ids.size
    dist = np.sqrt(pairwise_sq_distances(points, points))
    # the expanded-squares route leaves ~1e-7 residue at self-distances,
    # which would pollute the own-cluster means below
    np.fill_diagonal(dist, 0.0)
    counts = np.bincount(dense, minlength=k)
    one_hot = np.zeros((n, k))
    one_hot[np.arange(n), dense] = 1.0
    sums = dist @ one_hot  # sums[i, c] = total distance from i to cluster c

    own_count = counts[dense]
    own_sum = sums[np.arange(n), dense]
    scores = np.zeros(n)
    multi = own_count > 1
    a = np.zeros(n)
    a[multi] = own_sum[multi] / (own_count[multi] - 1)
    mean_other = sums / counts[None, :]
    mean_other[np.arange(n), dense] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    scores[multi] = (b[multi] - a[multi]) / denom[multi]
    return float(scores.mean())
