"""Deterministic window encoders with chunked, memory-bounded processing.

Three variants stand behind one interface:

* ``identity``  — each flattened window is its own embedding (d = w*c).
* ``meanpool``  — non-overlapping means of ``pool`` consecutive values per
  channel (d = (w / pool) * c); ``pool`` must divide the window size.
* ``randproj``  — window row times a fixed Gaussian matrix G(seed)/sqrt(d).

Externally produced embeddings can be injected through the artifact store
instead; nothing downstream depends on which encoder ran.

Outputs are bit-identical for every chunk size: meanpool reduces over a
fixed-length axis per row, and randproj accumulates the projection one input
column at a time (k ascending), so per-element rounding never depends on how
many rows share a chunk. Working memory stays within chunk_size * w * c
floats above input and output.

The Gaussian matrix is reproducible across runs and platforms. Entry (i, j)
of G uses counters c0 = 2*(i*d + j) and c1 = c0 + 1 fed to splitmix64:

    mix(x): x = (x + 0x9E3779B97F4A7C15) mod 2^64
            x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
            x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) mod 2^64
            return x ^ (x >> 31)
    h(counter) = mix(seed + (counter + 1) * 0x9E3779B97F4A7C15 mod 2^64)

then Box-Muller with u1 = ((h(c0) >> 11) + 1) * 2^-53 in (0, 1] and
u2 = (h(c1) >> 11) * 2^-53 in [0, 1):

    G[i, j] = sqrt(-2 ln u1) * cos(2 pi u2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInput
from .fingerprint import fingerprint
from .series import WindowMatrix

__all__ = [
    "EncoderConfig",
    "EmbeddingMatrix",
    "ShapeMismatch",
    "NonDivisiblePool",
    "encode_windows",
    "gaussian_matrix",
]

DEFAULT_CHUNK_SIZE = 8192

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


class ShapeMismatch(InvalidInput):
    pass


class NonDivisiblePool(InvalidInput):
    pass


@dataclass(frozen=True)
class EncoderConfig:
    """Encoder selection plus chunking. chunk_size never affects results."""

    variant: str = "identity"  # identity | meanpool | randproj
    pool: int = 1
    dims: int = 0
    seed: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self) -> None:
        if self.variant not in ("identity", "meanpool", "randproj"):
            raise InvalidInput(f"unknown encoder variant {self.variant!r}")
        if self.chunk_size < 1:
            raise InvalidInput("chunk_size must be a positive integer")
        if self.variant == "meanpool" and self.pool < 1:
            raise InvalidInput("meanpool requires pool >= 1")
        if self.variant == "randproj" and self.dims < 1:
            raise InvalidInput("randproj requires dims >= 1")

    def output_dim(self, w: int, c: int) -> int:
        if self.variant == "identity":
            return w * c
        if self.variant == "meanpool":
            if w % self.pool != 0:
                raise NonDivisiblePool(f"pool {self.pool} does not divide window size {w}")
            return (w // self.pool) * c
        if self.dims > w * c:
            raise ShapeMismatch(f"randproj dims {self.dims} exceed window width {w * c}")
        return self.dims

    def fingerprint_with(self, w: int, stride: int, c: int) -> str:
        # chunk_size is excluded: it cannot change the result.
        return fingerprint(
            {
                "encoder": self.variant,
                "pool": self.pool,
                "dims": self.dims,
                "seed": self.seed,
                "w": w,
                "stride": stride,
                "c": c,
            }
        )


@dataclass(frozen=True)
class EmbeddingMatrix:
    data: np.ndarray
    encoder_fingerprint: str

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def _splitmix64(counters: np.ndarray, seed: int) -> np.ndarray:
    x = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + (counters + np.uint64(1)) * _GOLDEN) & _MASK64
    x = ((x ^ (x >> np.uint64(30))) * _MIX1) & _MASK64
    x = ((x ^ (x >> np.uint64(27))) * _MIX2) & _MASK64
    return x ^ (x >> np.uint64(31))


def gaussian_matrix(rows: int, cols: int, seed: int) -> np.ndarray:
    """Fixed Gaussian matrix from the counter-based generator above."""
    idx = np.arange(rows * cols, dtype=np.uint64)
    h0 = _splitmix64(idx * np.uint64(2), seed)
    h1 = _splitmix64(idx * np.uint64(2) + np.uint64(1), seed)
    u1 = ((h0 >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u2 = (h1 >> np.uint64(11)).astype(np.float64) * 2.0**-53
    z = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)
    return z.reshape(rows, cols)


def _encode_chunk(chunk: np.ndarray, cfg: EncoderConfig, w: int, c: int, proj: Optional[np.ndarray], out: np.ndarray) -> None:
    if cfg.variant == "identity":
        out[:] = chunk
    elif cfg.variant == "meanpool":
        pooled = chunk.reshape(chunk.shape[0], c, w // cfg.pool, cfg.pool).mean(axis=3)
        out[:] = pooled.reshape(chunk.shape[0], -1)
    else:
        # Column-at-a-time accumulation keeps rounding independent of the
        # number of rows in the chunk (BLAS kernels would not).
        out[:] = 0.0
        for k in range(chunk.shape[1]):
            out += chunk[:, k : k + 1] * proj[k]


def encode_windows(wm: WindowMatrix, cfg: EncoderConfig) -> EmbeddingMatrix:
    """Encode every window, chunk by chunk."""
    w, c = wm.window_size, wm.channel_count
    d = cfg.output_dim(w, c)
    proj = None
    if cfg.variant == "randproj":
        proj = gaussian_matrix(w * c, d, cfg.seed) / math.sqrt(d)
    m = wm.m
    out = np.empty((m, d), dtype=np.float64)
    for start in range(0, m, cfg.chunk_size):
        stop = min(start + cfg.chunk_size, m)
        _encode_chunk(wm.data[start:stop], cfg, w, c, proj, out[start:stop])
    return EmbeddingMatrix(
        data=out,
        encoder_fingerprint=cfg.fingerprint_with(w, wm.stride, c),
    )
