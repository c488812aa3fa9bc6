"""Clustering against hand-computed cases, Kruskal and double-loop oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tslens.clustering import (
    ClusterLabels,
    ClusterParams,
    FewerThanTwoClusters,
    core_distances,
    hdbscan,
    minimum_spanning_tree,
    silhouette_score,
)
from tslens.errors import InvalidInput, NaNInput


def _blobs(per_blob, separation, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(per_blob, 2))
    b = rng.normal(size=(per_blob, 2))
    b[:, 0] += separation
    return np.vstack([a, b]), np.repeat([0, 1], per_blob)


def _partition(labels):
    """Clusters as a set of frozensets of member indices; noise dropped."""
    groups = {}
    for i, lab in enumerate(labels):
        if lab >= 0:
            groups.setdefault(int(lab), []).append(i)
    return {frozenset(v) for v in groups.values()}


def _adjusted_rand_index(a, b):
    """Standard pair-counting ARI, written as an independent oracle."""
    a = np.asarray(a)
    b = np.asarray(b)
    n = len(a)
    classes_a, ia = np.unique(a, return_inverse=True)
    classes_b, ib = np.unique(b, return_inverse=True)
    contingency = np.zeros((len(classes_a), len(classes_b)), dtype=np.int64)
    for x, y in zip(ia, ib):
        contingency[x, y] += 1

    def comb2(v):
        return v * (v - 1) // 2

    sum_ij = sum(comb2(v) for v in contingency.ravel())
    sum_a = sum(comb2(v) for v in contingency.sum(axis=1))
    sum_b = sum(comb2(v) for v in contingency.sum(axis=0))
    expected = sum_a * sum_b / comb2(n)
    maximum = (sum_a + sum_b) / 2
    return (sum_ij - expected) / (maximum - expected)


# --- parameter and label validation ---------------------------------------

def test_cluster_params_validation():
    with pytest.raises(InvalidInput):
        ClusterParams(min_cluster_size=1)
    with pytest.raises(InvalidInput):
        ClusterParams(min_cluster_size=3, min_samples=0)
    with pytest.raises(InvalidInput):
        ClusterParams(min_cluster_size=3, cluster_selection="leaf")
    assert ClusterParams(min_cluster_size=7).effective_min_samples == 7
    assert ClusterParams(min_cluster_size=7, min_samples=2).effective_min_samples == 2


def test_cluster_labels_must_be_dense():
    with pytest.raises(InvalidInput):
        ClusterLabels(labels=np.array([0, 2]), n_clusters=2)
    with pytest.raises(InvalidInput):
        ClusterLabels(labels=np.array([0, 1]), n_clusters=2, score=1.5)
    ok = ClusterLabels(labels=np.array([-1, 0, 1, 0]), n_clusters=2)
    assert ok.n_clusters == 2


# --- core distances ---------------------------------------------------------

def test_core_distance_counts_non_self_neighbours():
    P = np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]])
    assert np.allclose(core_distances(P, 1), [1.0, 1.0, 2.0])
    assert np.allclose(core_distances(P, 2), [3.0, 2.0, 3.0])


def test_core_distance_clamps_to_available_neighbours():
    P = np.array([[0.0, 0.0], [2.0, 0.0]])
    assert np.allclose(core_distances(P, 10), [2.0, 2.0])


# --- MST against a Kruskal oracle -------------------------------------------

def _kruskal_oracle_weight(P, min_samples):
    """Total MST weight over mutual reachability, via sorted-edge Kruskal."""
    m = len(P)
    d = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=2)
    with_self = np.sort(d, axis=1)  # column 0 is the self distance 0
    k = min(min_samples, m - 1)
    core = with_self[:, k]
    edges = []
    for i in range(m):
        for j in range(i + 1, m):
            edges.append((max(core[i], core[j], d[i, j]), i, j))
    edges.sort()
    parent = list(range(m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    total = 0.0
    used = 0
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            total += w
            used += 1
            if used == m - 1:
                break
    return total


@pytest.mark.parametrize("m,seed", [(10, 0), (25, 1), (50, 2)])
def test_mst_weight_matches_kruskal(m, seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(m, 2))
    edges = minimum_spanning_tree(P, 3)
    assert edges.shape == (m - 1, 3)
    assert edges[:, 0].sum() == pytest.approx(_kruskal_oracle_weight(P, 3), abs=1e-10)


def test_mst_edges_sorted_deterministically():
    rng = np.random.default_rng(3)
    P = rng.normal(size=(30, 2))
    a = minimum_spanning_tree(P, 2)
    b = minimum_spanning_tree(P, 2)
    assert a.tobytes() == b.tobytes()
    assert np.all(np.diff(a[:, 0]) >= 0)


# --- hdbscan -----------------------------------------------------------------

def test_all_noise_when_too_few_points():
    P = np.array([[0.0, 0.0], [1.0, 1.0]])
    out = hdbscan(P, ClusterParams(min_cluster_size=3))
    assert np.array_equal(out.labels, [-1, -1])
    assert out.n_clusters == 0


def test_two_triples_hand_case():
    # Two congruent triangles 100 apart; triple edges have mutual
    # reachability sqrt(2), the bridge 99, so condensation at
    # min_cluster_size=3 yields exactly the two triples.
    P = np.array(
        [
            [0.0, 0.0], [1.0, 0.0], [0.0, 1.0],
            [100.0, 0.0], [101.0, 0.0], [100.0, 1.0],
        ]
    )
    out = hdbscan(P, ClusterParams(min_cluster_size=3, min_samples=2))
    assert out.n_clusters == 2
    assert _partition(out.labels) == {frozenset({0, 1, 2}), frozenset({3, 4, 5})}


def test_two_blobs_recovered_exactly():
    P, truth = _blobs(50, 20.0, seed=0)
    out = hdbscan(P, ClusterParams(min_cluster_size=10))
    assert out.n_clusters == 2
    kept = out.labels >= 0
    assert kept.all()
    assert _adjusted_rand_index(out.labels, truth) == pytest.approx(1.0)


def test_hdbscan_nan_rejected():
    with pytest.raises(NaNInput):
        hdbscan(np.array([[0.0, np.nan]]), ClusterParams(min_cluster_size=2))


def test_hdbscan_label_values_dense():
    P, _ = _blobs(30, 15.0, seed=1)
    out = hdbscan(P, ClusterParams(min_cluster_size=5))
    distinct = set(out.labels.tolist()) - {-1}
    assert distinct == set(range(out.n_clusters))
    for lab in distinct:
        assert (out.labels == lab).sum() >= 5


def test_hdbscan_permutation_invariant():
    P, _ = _blobs(40, 12.0, seed=2)
    base = hdbscan(P, ClusterParams(min_cluster_size=8))
    rng = np.random.default_rng(7)
    perm = rng.permutation(len(P))
    shuffled = hdbscan(P[perm], ClusterParams(min_cluster_size=8))
    # map shuffled labels back to original positions, compare partitions
    unshuffled = np.empty_like(shuffled.labels)
    unshuffled[perm] = shuffled.labels
    assert _partition(base.labels) == _partition(unshuffled)


def test_hdbscan_translation_and_scale_invariant():
    P, _ = _blobs(40, 12.0, seed=3)
    base = hdbscan(P, ClusterParams(min_cluster_size=8))
    moved = hdbscan(P * 3.5 + 200.0, ClusterParams(min_cluster_size=8))
    assert _partition(base.labels) == _partition(moved.labels)


def test_hdbscan_single_point():
    out = hdbscan(np.array([[1.0, 2.0]]), ClusterParams(min_cluster_size=2))
    assert np.array_equal(out.labels, [-1])


# --- silhouette --------------------------------------------------------------

def test_silhouette_hand_case():
    P = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
    labels = np.array([0, 0, 1, 1])
    b = (10.0 + np.sqrt(101.0)) / 2.0
    expected = (b - 1.0) / b
    assert silhouette_score(P, labels) == pytest.approx(expected, abs=1e-12)
    assert silhouette_score(P, labels) == pytest.approx(0.9002, abs=5e-4)


def test_silhouette_duplicate_points():
    P = np.array([[1.0, 1.0], [1.0, 1.0], [5.0, 5.0], [5.0, 5.0]])
    assert silhouette_score(P, np.array([0, 0, 1, 1])) == pytest.approx(1.0)


def test_silhouette_requires_two_clusters():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(FewerThanTwoClusters):
        silhouette_score(P, np.array([0, 0]))
    with pytest.raises(FewerThanTwoClusters):
        silhouette_score(P, np.array([-1, -1]))


def test_silhouette_excludes_noise():
    P = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0], [500.0, 500.0]])
    labels = np.array([0, 0, 1, 1, -1])
    clean = silhouette_score(P[:4], labels[:4])
    assert silhouette_score(P, labels) == pytest.approx(clean, abs=1e-12)


def test_silhouette_singleton_cluster_scores_zero():
    P = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0]])
    labels = np.array([0, 0, 1])
    # the two pair points score (b-a)/max(a,b); the singleton contributes 0
    d02 = np.linalg.norm(P[0] - P[2])
    d12 = np.linalg.norm(P[1] - P[2])
    s0 = (d02 - 1.0) / d02
    s1 = (d12 - 1.0) / d12
    assert silhouette_score(P, labels) == pytest.approx((s0 + s1) / 3.0, abs=1e-12)


def _silhouette_oracle(P, labels):
    """Naive per-point double loop."""
    mask = labels >= 0
    P = P[mask]
    labels = labels[mask]
    scores = []
    for i in range(len(P)):
        own = labels[i]
        same = [j for j in range(len(P)) if labels[j] == own and j != i]
        if not same:
            scores.append(0.0)
            continue
        a = np.mean([np.linalg.norm(P[i] - P[j]) for j in same])
        b = min(
            np.mean([np.linalg.norm(P[i] - P[j]) for j in range(len(P)) if labels[j] == other])
            for other in set(labels.tolist()) - {own}
        )
        scores.append((b - a) / max(a, b))
    return float(np.mean(scores))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_silhouette_matches_double_loop_oracle(seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(300, 2)) * 3
    labels = rng.integers(-1, 4, size=300)
    assert silhouette_score(P, labels) == pytest.approx(
        _silhouette_oracle(P, labels), abs=1e-10
    )


@settings(max_examples=20, deadline=None)
@given(
    m=st.integers(min_value=4, max_value=40),
    k=st.integers(min_value=2, max_value=4),
    seed=st.integers(min_value=0, max_value=10_000),
)
def test_silhouette_always_in_range(m, k, seed):
    rng = np.random.default_rng(seed)
    P = rng.normal(size=(m, 2))
    labels = np.array([i % k for i in range(m)])
    assert -1.0 <= silhouette_score(P, labels) <= 1.0
