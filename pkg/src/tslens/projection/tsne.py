"""Exact t-SNE for small point counts.

Everything is O(m^2): full pairwise affinities, per-point bandwidth found
by bisection against the perplexity target, and 1000 gradient-descent
iterations with momentum (0.5 until iteration 250, then 0.8), per-parameter
adaptive gains, learning rate 200, and 12x early exaggeration for the first
250 iterations. Initial coordinates are seeded Gaussian with standard
deviation 1e-4. Inputs above 5000 points are refused; UMAP or PCA handle
those scales.
"""

from __future__ import annotations

import numpy as np

from ..errors import InvalidInput
from ._common import TooManyPoints, check_finite_matrix, pairwise_sq_distances

__all__ = ["tsne", "TSNE_MAX_POINTS"]

TSNE_MAX_POINTS = 5000

_N_ITER = 1000
_MOMENTUM_SWITCH = 250
_EXAGGERATION_ITERS = 250
_EXAGGERATION = 12.0
_LEARNING_RATE = 200.0


def _conditional_probabilities(d2: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-stochastic affinities whose entropy matches log(perplexity).

    Bisection over the precision beta_i = 1/(2 sigma_i^2), all rows advanced
    in lockstep: 50 iterations, tolerance 1e-5 on the entropy.
    """
    m = d2.shape[0]
    target = np.log(perplexity)
    off_diag = ~np.eye(m, dtype=bool)
    d = d2[off_diag].reshape(m, m - 1)
    beta = np.ones(m)
    beta_lo = np.full(m, -np.inf)
    beta_hi = np.full(m, np.inf)
    p = np.empty_like(d)
    for _ in range(50):
        np.exp(-d * beta[:, None], out=p)
        sum_p = np.maximum(p.sum(axis=1), 1e-300)
        entropy = np.log(sum_p) + beta * (d * p).sum(axis=1) / sum_p
        err = entropy - target
        done = np.abs(err) < 1e-5
        if done.all():
            break
        too_high = err > 0
        beta_lo = np.where(too_high & ~done, beta, beta_lo)
        beta_hi = np.where(~too_high & ~done, beta, beta_hi)
        raised = np.where(np.isinf(beta_hi), beta * 2.0, (beta + beta_hi) / 2.0)
        lowered = np.where(np.isinf(beta_lo), beta / 2.0, (beta + beta_lo) / 2.0)
        beta = np.where(done, beta, np.where(too_high, raised, lowered))
    p /= p.sum(axis=1, keepdims=True)
    full = np.zeros((m, m))
    full[off_diag] = p.ravel()
    return full


def tsne(X: np.ndarray, params) -> np.ndarray:
    """Embed rows of X into 2-D. Deterministic given params.random_state."""
    X = check_finite_matrix(X, "tsne input")
    m = X.shape[0]
    if m > TSNE_MAX_POINTS:
        raise TooManyPoints(
            f"exact tsne is limited to {TSNE_MAX_POINTS} points, got {m}; "
            "use umap or pca at this scale"
        )
    perplexity = float(params.tsne_perplexity)
    if not perplexity < (m - 1) / 3:
        raise InvalidInput(
            f"perplexity {perplexity} too large for {m} points (needs perplexity < (m-1)/3)"
        )

    cond = _conditional_probabilities(pairwise_sq_distances(X, X), perplexity)
    joint = np.maximum((cond + cond.T) / (2.0 * m), 1e-12)

    rng = np.random.default_rng(params.random_state)
    Y = rng.normal(0.0, 1e-4, size=(m, 2))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)

    P = joint * _EXAGGERATION
    for it in range(_N_ITER):
        num = 1.0 / (1.0 + pairwise_sq_distances(Y, Y))
        np.fill_diagonal(num, 0.0)
        Q = np.maximum(num / num.sum(), 1e-12)
        L = (P - Q) * num
        grad = 4.0 * (L.sum(axis=1)[:, None] * Y - L @ Y)

        momentum = 0.5 if it < _MOMENTUM_SWITCH else 0.8
        same_sign = np.sign(grad) == np.sign(velocity)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, 0.01, out=gains)
        velocity = momentum * velocity - _LEARNING_RATE * gains * grad
        Y = Y + velocity
        Y -= Y.mean(axis=0)
        if it == _EXAGGERATION_ITERS - 1:
            P = joint
    return Y
