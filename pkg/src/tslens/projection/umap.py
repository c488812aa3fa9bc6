"""UMAP: fuzzy-topology dimensionality reduction, fully deterministic when seeded.

Stages, all exact (no approximate neighbour search):

1.  Exact k-NN on Euclidean distance, computed in row blocks.
2.  Per-point calibration: rho_i is the distance to the nearest neighbour;
    sigma_i is found by bisection (64 iterations, tolerance 1e-5) so that
    sum_j exp(-max(0, d_ij - rho_i) / sigma_i) = log2(n_neighbors).
3.  Fuzzy union of the directed graph: B = A + A^T - A o A^T.
4.  Low-dimensional kernel coefficients (a, b) fit by least squares so that
    1/(1 + a x^(2b)) tracks the target curve defined by min_dist (spread 1).
5.  Spectral initialisation from the normalized graph Laplacian (shift-invert
    eigensolve, seeded start vector); on any eigensolver failure the fallback
    is seeded uniform coordinates in [-10, 10]^2.
6.  200 epochs of sequential stochastic gradient descent with negative
    sampling rate 5, gradient clipping at +/-4, and learning rate decaying
    linearly from 1 to 0. Edge sampling density follows edge weight; edges
    lighter than max_weight / n_epochs are dropped.

The SGD sample order and negative draws come from a counter-free splitmix64
stream seeded from random_state, so repeated runs are bit-identical.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.optimize import curve_fit
from scipy.sparse.linalg import eigsh

from ._common import TooFewPoints, check_finite_matrix, knn_euclidean

__all__ = ["umap", "fit_kernel_coefficients", "smooth_knn_calibration", "fuzzy_graph"]

N_EPOCHS_SMALL = 500
N_EPOCHS_LARGE = 200
SMALL_GRAPH_LIMIT = 10_000
NEGATIVE_SAMPLE_RATE = 5
REPULSION_STRENGTH = 1.0


def smooth_knn_calibration(distances: np.ndarray, n_iter: int = 64, tol: float = 1e-5):
    """Per-row (sigma, rho) for ascending neighbour distances, self excluded."""
    m, k = distances.shape
    target = np.log2(k)
    rho = distances[:, 0].copy()
    adjusted = np.maximum(distances - rho[:, None], 0.0)
    lo = np.zeros(m)
    hi = np.full(m, np.inf)
    mid = np.ones(m)
    for _ in range(n_iter):
        weight_sum = np.exp(-adjusted / mid[:, None]).sum(axis=1)
        err = weight_sum - target
        done = np.abs(err) < tol
        if done.all():
            break
        too_high = err > 0
        hi = np.where(too_high & ~done, mid, hi)
        lo = np.where(~too_high & ~done, mid, lo)
        halved = (lo + hi) / 2.0
        grown = np.where(np.isinf(hi), mid * 2.0, halved)
        mid = np.where(done, mid, np.where(too_high, halved, grown))
    return mid, rho


def fuzzy_graph(X: np.ndarray, n_neighbors: int) -> sp.csr_matrix:
    """Symmetric fuzzy membership graph over the exact k-NN of X."""
    m = X.shape[0]
    idx, dist = knn_euclidean(X, n_neighbors)
    sigma, rho = smooth_knn_calibration(dist)
    weights = np.exp(-np.maximum(dist - rho[:, None], 0.0) / sigma[:, None])
    rows = np.repeat(np.arange(m, dtype=np.int64), n_neighbors)
    directed = sp.coo_matrix(
        (weights.ravel(), (rows, idx.ravel())), shape=(m, m)
    ).tocsr()
    transpose = directed.T.tocsr()
    return directed + transpose - directed.multiply(transpose)


def fit_kernel_coefficients(min_dist: float, spread: float = 1.0):
    """Least-squares (a, b) so 1/(1+a x^(2b)) matches the min_dist fall-off."""
    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = np.where(xv < min_dist, 1.0, np.exp(-(xv - min_dist) / spread))

    def curve(x, a, b):
        return 1.0 / (1.0 + a * x ** (2.0 * b))

    (a, b), _ = curve_fit(curve, xv, yv, p0=(1.0, 1.0))
    return float(a), float(b)


def _spectral_init(graph: sp.csr_matrix, rng: np.random.Generator) -> np.ndarray:
    m = graph.shape[0]
    degree = np.asarray(graph.sum(axis=1)).ravel()
    inv_sqrt = np.where(degree > 0.0, 1.0 / np.sqrt(np.maximum(degree, 1e-300)), 0.0)
    scaling = sp.diags(inv_sqrt)
    laplacian = (sp.identity(m, format="csr") - scaling @ graph @ scaling).tocsc()
    v0 = rng.uniform(-1.0, 1.0, m)
    try:
        # Shift-invert around a small negative sigma: L is PSD, so L - sigma*I
        # is positive definite and the factorization cannot hit the null space.
        values, vectors = eigsh(laplacian, k=3, sigma=-1e-3, which="LM", v0=v0)
    except Exception:
        return rng.uniform(-10.0, 10.0, size=(m, 2))
    order = np.argsort(values)
    init = vectors[:, order[1:3]]
    peak = np.abs(init).max()
    if not np.isfinite(peak) or peak == 0.0:
        return rng.uniform(-10.0, 10.0, size=(m, 2))
    init = init * (10.0 / peak)
    # Seeded jitter separates points that land on identical spectral coords.
    return init + rng.normal(scale=1e-4, size=(m, 2))


@njit(cache=True)
def _clip(value):
    if value > 4.0:
        return 4.0
    if value < -4.0:
        return -4.0
    return value


@njit(cache=True)
def _sgd(embedding, head, tail, epochs_per_sample, a, b, gamma, n_epochs, seed, negative_sample_rate):
    n_vertices = embedding.shape[0]
    dim = embedding.shape[1]
    n_edges = epochs_per_sample.shape[0]
    epochs_per_negative_sample = epochs_per_sample / negative_sample_rate
    epoch_of_next_sample = epochs_per_sample.copy()
    epoch_of_next_negative_sample = epochs_per_negative_sample.copy()
    state = np.uint64(seed)
    golden = np.uint64(0x9E3779B97F4A7C15)
    mix1 = np.uint64(0xBF58476D1CE4E5B9)
    mix2 = np.uint64(0x94D049BB133111EB)
    alpha = 1.0
    for epoch in range(n_epochs):
        for i in range(n_edges):
            if epoch_of_next_sample[i] > epoch:
                continue
            j = head[i]
            k = tail[i]
            dist_squared = 0.0
            for d in range(dim):
                diff = embedding[j, d] - embedding[k, d]
                dist_squared += diff * diff
            if dist_squared > 0.0:
                grad_coeff = -2.0 * a * b * dist_squared ** (b - 1.0)
                grad_coeff /= a * dist_squared ** b + 1.0
            else:
                grad_coeff = 0.0
            for d in range(dim):
                grad_d = _clip(grad_coeff * (embedding[j, d] - embedding[k, d]))
                embedding[j, d] += grad_d * alpha
                embedding[k, d] -= grad_d * alpha
            epoch_of_next_sample[i] += epochs_per_sample[i]

            n_neg = int((epoch - epoch_of_next_negative_sample[i]) / epochs_per_negative_sample[i])
            for _ in range(n_neg):
                state = state + golden
                z = state
                z = (z ^ (z >> np.uint64(30))) * mix1
                z = (z ^ (z >> np.uint64(27))) * mix2
                z = z ^ (z >> np.uint64(31))
                other = int(z % np.uint64(n_vertices))
                if other == j:
                    continue
                dist_squared = 0.0
                for d in range(dim):
                    diff = embedding[j, d] - embedding[other, d]
                    dist_squared += diff * diff
                if dist_squared > 0.0:
                    grad_coeff = 2.0 * gamma * b
                    grad_coeff /= (0.001 + dist_squared) * (a * dist_squared ** b + 1.0)
                else:
                    grad_coeff = 0.0
                for d in range(dim):
                    if grad_coeff > 0.0:
                        grad_d = _clip(grad_coeff * (embedding[j, d] - embedding[other, d]))
                    else:
                        # Coincident points get a fixed symmetric-breaking kick.
                        grad_d = 4.0
                    embedding[j, d] += grad_d * alpha
            epoch_of_next_negative_sample[i] += n_neg * epochs_per_negative_sample[i]
        alpha = 1.0 - (epoch + 1.0) / n_epochs


def umap(X: np.ndarray, params) -> np.ndarray:
    """Embed rows of X into 2-D. Deterministic given params.random_state."""
    X = check_finite_matrix(X, "umap input")
    m = X.shape[0]
    if not 2 <= params.n_neighbors < m:
        raise TooFewPoints(
            f"umap needs 2 <= n_neighbors < m, got n_neighbors={params.n_neighbors} m={m}"
        )

    graph = fuzzy_graph(X, params.n_neighbors)
    a, b = fit_kernel_coefficients(params.min_dist)

    rng = np.random.default_rng(params.random_state)
    embedding = np.ascontiguousarray(_spectral_init(graph, rng), dtype=np.float64)

    # small graphs get more epochs to converge, large ones stay affordable
    n_epochs = N_EPOCHS_SMALL if m <= SMALL_GRAPH_LIMIT else N_EPOCHS_LARGE
    edges = graph.tocoo()
    data = edges.data.copy()
    data[data < data.max() / n_epochs] = 0.0
    keep = data > 0.0
    head = edges.row[keep].astype(np.int64)
    tail = edges.col[keep].astype(np.int64)
    weights = data[keep]
    epochs_per_sample = weights.max() / weights

    _sgd(
        embedding,
        head,
        tail,
        epochs_per_sample,
        float(a),
        float(b),
        REPULSION_STRENGTH,
        n_epochs,
        params.random_state,
        float(NEGATIVE_SAMPLE_RATE),
    )
    return embedding
