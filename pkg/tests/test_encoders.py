"""Window encoders: identity, mean pooling, random projection.

The load-bearing invariant is chunk transparency: every encoder must
return bit-identical output regardless of chunk size, so cache keys
built from encoder output never depend on execution layout.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tslens.encoders import (
    EncoderConfig,
    NonDivisiblePool,
    ShapeMismatch,
    encode_windows,
    gaussian_matrix,
)
from tslens.errors import InvalidInput
from tslens.series import WindowMatrix


def _window_matrix(m, w, c, stride=1, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(m, c * w)).astype(np.float64)
    n = (m - 1) * stride + w
    return WindowMatrix(
        data=data, window_size=w, stride=stride, channel_count=c, source_length=n
    )


def _wrap(data, w, c, stride=1):
    m = data.shape[0]
    n = (m - 1) * stride + w
    return WindowMatrix(
        data=np.asarray(data, dtype=np.float64),
        window_size=w,
        stride=stride,
        channel_count=c,
        source_length=n,
    )


# --- configuration validation -------------------------------------------

def test_identity_output_dim():
    cfg = EncoderConfig(variant="identity")
    assert cfg.output_dim(48, 2) == 96


def test_meanpool_output_dim():
    cfg = EncoderConfig(variant="meanpool", pool=4)
    assert cfg.output_dim(48, 2) == 24


def test_meanpool_requires_divisible_window():
    cfg = EncoderConfig(variant="meanpool", pool=5)
    with pytest.raises(NonDivisiblePool):
        cfg.output_dim(48, 1)


def test_randproj_output_dim():
    cfg = EncoderConfig(variant="randproj", dims=16, seed=7)
    assert cfg.output_dim(48, 2) == 16


def test_randproj_dims_bounded_by_input():
    cfg = EncoderConfig(variant="randproj", dims=97, seed=7)
    with pytest.raises(ShapeMismatch):
        cfg.output_dim(48, 2)


def test_bad_variant_rejected():
    with pytest.raises(InvalidInput):
        EncoderConfig(variant="conv")


def test_bad_pool_rejected():
    with pytest.raises(InvalidInput):
        EncoderConfig(variant="meanpool", pool=0)


def test_randproj_needs_positive_dims():
    with pytest.raises(InvalidInput):
        EncoderConfig(variant="randproj", dims=0, seed=3)


def test_bad_chunk_size_rejected():
    with pytest.raises(InvalidInput):
        EncoderConfig(variant="identity", chunk_size=0)


# --- semantics -----------------------------------------------------------

def test_identity_is_copy():
    wm = _window_matrix(10, 8, 1)
    out = encode_windows(wm, EncoderConfig(variant="identity"))
    assert np.array_equal(out.data, wm.data)
    assert out.data is not wm.data


def test_meanpool_matches_block_means():
    # One channel, w=8, pool=4: output columns are means of 4-wide blocks.
    X = np.arange(16, dtype=np.float64).reshape(2, 8)
    out = encode_windows(_wrap(X, 8, 1), EncoderConfig(variant="meanpool", pool=4))
    expected = np.array([[1.5, 5.5], [9.5, 13.5]])
    assert np.array_equal(out.data, expected)


def test_meanpool_pools_within_channels():
    # Two channels, w=4, pool=2. Channel blocks must not mix.
    row = np.array([[0.0, 2.0, 4.0, 6.0, 100.0, 102.0, 104.0, 106.0]])
    out = encode_windows(_wrap(row, 4, 2), EncoderConfig(variant="meanpool", pool=2))
    assert np.array_equal(out.data, np.array([[1.0, 5.0, 101.0, 105.0]]))


def test_meanpool_pool_equals_window_collapses_channel():
    row = np.array([[1.0, 2.0, 3.0, 4.0]])
    out = encode_windows(_wrap(row, 4, 1), EncoderConfig(variant="meanpool", pool=4))
    assert np.array_equal(out.data, np.array([[2.5]]))


def test_randproj_matches_direct_matmul_closely():
    wm = _window_matrix(50, 16, 1, seed=3)
    cfg = EncoderConfig(variant="randproj", dims=8, seed=11)
    out = encode_windows(wm, cfg)
    G = gaussian_matrix(16, 8, seed=11) / np.sqrt(8.0)
    assert np.allclose(out.data, wm.data @ G, atol=1e-12)


def test_randproj_seed_determines_output():
    wm = _window_matrix(20, 8, 1)
    cfg = EncoderConfig(variant="randproj", dims=4, seed=5)
    a = encode_windows(wm, cfg)
    b = encode_windows(wm, cfg)
    assert np.array_equal(a.data, b.data)
    other = encode_windows(wm, EncoderConfig(variant="randproj", dims=4, seed=6))
    assert not np.array_equal(a.data, other.data)


def test_gaussian_matrix_distribution():
    G = gaussian_matrix(200, 200, seed=0)
    assert abs(G.mean()) < 0.01
    assert abs(G.std() - 1.0) < 0.01
    # Counter-based generation: different seeds give unrelated matrices.
    H = gaussian_matrix(200, 200, seed=1)
    assert abs(np.corrcoef(G.ravel(), H.ravel())[0, 1]) < 0.02


def test_randproj_dims_checked_at_encode_time():
    wm = _window_matrix(4, 8, 1)
    with pytest.raises(ShapeMismatch):
        encode_windows(wm, EncoderConfig(variant="randproj", dims=9, seed=0))


# --- chunk transparency --------------------------------------------------

CHUNK_SIZES = (1, 7, 64, 1024, 10_000)


@pytest.mark.parametrize("chunk", CHUNK_SIZES)
def test_identity_chunk_invariant(chunk):
    wm = _window_matrix(333, 12, 2, seed=1)
    a = encode_windows(wm, EncoderConfig(variant="identity", chunk_size=8192))
    b = encode_windows(wm, EncoderConfig(variant="identity", chunk_size=chunk))
    assert a.data.tobytes() == b.data.tobytes()


@pytest.mark.parametrize("chunk", CHUNK_SIZES)
def test_meanpool_chunk_invariant(chunk):
    wm = _window_matrix(333, 12, 2, seed=2)
    a = encode_windows(wm, EncoderConfig(variant="meanpool", pool=3, chunk_size=8192))
    b = encode_windows(wm, EncoderConfig(variant="meanpool", pool=3, chunk_size=chunk))
    assert a.data.tobytes() == b.data.tobytes()


@pytest.mark.parametrize("chunk", CHUNK_SIZES)
def test_randproj_chunk_invariant(chunk):
    wm = _window_matrix(333, 12, 2, seed=3)
    a = encode_windows(wm, EncoderConfig(variant="randproj", dims=6, seed=9, chunk_size=8192))
    b = encode_windows(wm, EncoderConfig(variant="randproj", dims=6, seed=9, chunk_size=chunk))
    assert a.data.tobytes() == b.data.tobytes()


@settings(max_examples=25, deadline=None)
@given(
    m=st.integers(min_value=1, max_value=40),
    chunk=st.integers(min_value=1, max_value=50),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_randproj_chunk_invariant_property(m, chunk, seed):
    wm = _window_matrix(m, 6, 1, seed=seed % 997)
    a = encode_windows(wm, EncoderConfig(variant="randproj", dims=3, seed=seed, chunk_size=10_000))
    b = encode_windows(wm, EncoderConfig(variant="randproj", dims=3, seed=seed, chunk_size=chunk))
    assert a.data.tobytes() == b.data.tobytes()


# --- fingerprints --------------------------------------------------------

def test_fingerprint_ignores_chunk_size():
    a = EncoderConfig(variant="meanpool", pool=4, chunk_size=8192)
    b = EncoderConfig(variant="meanpool", pool=4, chunk_size=17)
    assert a.fingerprint_with(48, 1, 1) == b.fingerprint_with(48, 1, 1)


def test_fingerprint_sensitive_to_parameters():
    base = EncoderConfig(variant="randproj", dims=8, seed=1)
    fp = base.fingerprint_with(48, 1, 1)
    assert fp != EncoderConfig(variant="randproj", dims=8, seed=2).fingerprint_with(48, 1, 1)
    assert fp != base.fingerprint_with(49, 1, 1)
    assert fp != base.fingerprint_with(48, 2, 1)


def test_embedding_carries_fingerprint():
    wm = _window_matrix(5, 6, 1)
    cfg = EncoderConfig(variant="identity")
    out = encode_windows(wm, cfg)
    assert out.encoder_fingerprint == cfg.fingerprint_with(6, 1, 1)
    assert (out.m, out.dim) == (5, 6)
