"""Core time-series representation and the operations every pipeline stage
builds on: decimating resample, sliding-window construction, min/max display
downsampling, and the bidirectional window <-> time-index selection mapping.

A frequency factor ``k`` keeps every k-th row of a series, turning a declared
sampling period ``f`` into ``k * f``. Missing values travel as quiet NaN:
display emits them as gaps, numeric stages downstream reject them.

All functions here are pure; the containers are frozen dataclasses wrapping
read-only numpy arrays, so values can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidInput

__all__ = [
    "TimeSeries",
    "WindowMatrix",
    "DisplayChannel",
    "DisplaySeries",
    "WindowTooLarge",
    "resample",
    "sliding_windows",
    "downsample_display",
    "window_range_for_point",
    "point_indices_for_time",
    "DISPLAY_CAP_DEFAULT",
]

DISPLAY_CAP_DEFAULT = 10_000

FrequencyLike = Union[int, float, Fraction, None]


class WindowTooLarge(InvalidInput):
    """Window size exceeds the series length."""


def _readonly(arr: np.ndarray) -> np.ndarray:
    """Return a read-only view, copying only when the input is not owned."""
    view = arr.view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True)
class TimeSeries:
    """Time-indexed multichannel numeric table.

    timestamps : int64 epoch-nanoseconds, strictly increasing, shape (n,)
    values     : float64, shape (n, c); column j belongs to channel_names[j]
    frequency_seconds : declared sampling period, exact rational or None
    """

    timestamps: np.ndarray
    values: np.ndarray
    channel_names: Tuple[str, ...]
    frequency_seconds: Optional[Fraction] = None

    def __post_init__(self) -> None:
        ts = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim == 1:
            vals = vals.reshape(-1, 1)
        if ts.ndim != 1:
            raise InvalidInput("timestamps must be one-dimensional")
        if vals.ndim != 2 or vals.shape[0] != ts.shape[0]:
            raise InvalidInput(
                f"values shape {vals.shape} does not match {ts.shape[0]} timestamps"
            )
        if ts.shape[0] < 1:
            raise InvalidInput("a series must contain at least one row")
        if len(self.channel_names) != vals.shape[1]:
            raise InvalidInput(
                f"{len(self.channel_names)} channel names for {vals.shape[1]} columns"
            )
        if ts.shape[0] > 1 and not np.all(np.diff(ts) > 0):
            raise InvalidInput("timestamps must be strictly increasing")
        freq = self.frequency_seconds
        if freq is not None:
            freq = Fraction(freq)
            if freq <= 0:
                raise InvalidInput("frequency_seconds must be positive")
        object.__setattr__(self, "timestamps", _readonly(ts))
        object.__setattr__(self, "values", _readonly(vals))
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        object.__setattr__(self, "frequency_seconds", freq)

    @property
    def n(self) -> int:
        return self.timestamps.shape[0]

    @property
    def channel_count(self) -> int:
        return self.values.shape[1]

    def channels(self) -> Iterator[Tuple[str, np.ndarray]]:
        for j, name in enumerate(self.channel_names):
            yield name, self.values[:, j]

    @staticmethod
    def from_channels(
        timestamps: Sequence[int],
        channels: Sequence[Tuple[str, Sequence[float]]],
        frequency_seconds: FrequencyLike = None,
    ) -> "TimeSeries":
        names = tuple(name for name, _ in channels)
        cols = [np.asarray(vals, dtype=np.float64) for _, vals in channels]
        values = np.column_stack(cols) if cols else np.empty((len(timestamps), 0))
        return TimeSeries(
            timestamps=np.asarray(timestamps, dtype=np.int64),
            values=values,
            channel_names=names,
            frequency_seconds=frequency_seconds,
        )


@dataclass(frozen=True)
class WindowMatrix:
    """Sliding windows flattened one per row.

    Row i is the concatenation over channels of
    ``values[i*stride : i*stride + window_size]``, so the first
    ``window_size`` columns come from channel 0, the next from channel 1,
    and so on. ``data`` has shape (m, window_size * channel_count) with
    m = floor((source_length - window_size) / stride) + 1.
    """

    data: np.ndarray
    window_size: int
    stride: int
    channel_count: int
    source_length: int

    def __post_init__(self) -> None:
        expected_m = (self.source_length - self.window_size) // self.stride + 1
        if self.data.shape != (expected_m, self.window_size * self.channel_count):
            raise InvalidInput(
                f"window matrix shape {self.data.shape} inconsistent with "
                f"w={self.window_size} stride={self.stride} c={self.channel_count} "
                f"n={self.source_length}"
            )
        object.__setattr__(self, "data", _readonly(np.ascontiguousarray(self.data)))

    @property
    def m(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class DisplayChannel:
    name: str
    timestamps: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class DisplaySeries:
    """Per-channel (timestamp, value) points capped for rendering.

    Channels may emit different point sets because bucket extremes land on
    different rows per channel. Per-bucket minima and maxima of the source
    are always among the emitted points.
    """

    channels: Tuple[DisplayChannel, ...]
    cap: int
    source_length: int = 0

    def point_counts(self) -> Tuple[int, ...]:
        return tuple(ch.timestamps.shape[0] for ch in self.channels)


def resample(series: TimeSeries, k: int) -> TimeSeries:
    """Keep exactly the rows at source indices {i : i mod k == 0}.

    Output length is floor((n-1)/k) + 1 and the declared sampling period is
    multiplied by k. This is pure decimation, not aggregation.
    """
    if k < 1:
        raise InvalidInput(f"frequency factor must be >= 1, got {k}")
    if k == 1:
        return series
    freq = series.frequency_seconds
    return TimeSeries(
        timestamps=series.timestamps[::k],
        values=series.values[::k],
        channel_names=series.channel_names,
        frequency_seconds=None if freq is None else freq * k,
    )


def sliding_windows(series: TimeSeries, w: int, stride: int = 1) -> WindowMatrix:
    """Build the matrix of flattened sliding windows over all channels."""
    if w < 1:
        raise InvalidInput(f"window size must be >= 1, got {w}")
    if stride < 1:
        raise InvalidInput(f"stride must be >= 1, got {stride}")
    n = series.n
    if w > n:
        raise WindowTooLarge(f"window size {w} exceeds series length {n}")
    # (n-w+1, c, w) view: axis 0 window start, axis 1 channel, axis 2 offset.
    view = np.lib.stride_tricks.sliding_window_view(series.values, w, axis=0)
    strided = view[::stride]
    m = strided.shape[0]
    data = strided.reshape(m, series.channel_count * w).copy()
    return WindowMatrix(
        data=data,
        window_size=w,
        stride=stride,
        channel_count=series.channel_count,
        source_length=n,
    )


def _bucket_extreme_indices(col: np.ndarray, bucket_size: int) -> np.ndarray:
    """Per-bucket indices of the min and max of ``col``, in index order.

    All-NaN buckets contribute a single index (the bucket start) so the gap
    survives into the display. Buckets where min and max coincide emit one
    index. Result is a flat, sorted, deduplicated index array.
    """
    n = col.shape[0]
    n_buckets = math.ceil(n / bucket_size)
    padded_len = n_buckets * bucket_size
    lo = np.full(padded_len, np.inf)
    hi = np.full(padded_len, -np.inf)
    mask = np.isnan(col)
    lo[:n] = np.where(mask, np.inf, col)
    hi[:n] = np.where(mask, -np.inf, col)
    lo = lo.reshape(n_buckets, bucket_size)
    hi = hi.reshape(n_buckets, bucket_size)
    starts = np.arange(n_buckets, dtype=np.int64) * bucket_size
    imin = starts + np.argmin(lo, axis=1)
    imax = starts + np.argmax(hi, axis=1)
    all_nan = np.all(np.isinf(lo), axis=1)
    imin[all_nan] = starts[all_nan]
    imax[all_nan] = starts[all_nan]
    pairs = np.sort(np.stack([imin, imax], axis=1), axis=1)
    keep_second = pairs[:, 1] != pairs[:, 0]
    idx = np.concatenate([pairs[:, 0], pairs[keep_second, 1]])
    idx.sort()
    return np.minimum(idx, n - 1)


def downsample_display(series: TimeSeries, cap: int = DISPLAY_CAP_DEFAULT) -> DisplaySeries:
    """Reduce a series to at most ``cap`` display points per channel.

    Below the cap the series passes through unchanged. Above it, rows are
    split into cap/2 equal-size contiguous buckets (the last may be shorter)
    and each bucket contributes its per-channel minimum and maximum, in
    timestamp order, so global extremes are never lost.
    """
    if cap < 2 or cap % 2 != 0:
        raise InvalidInput(f"display cap must be an even integer >= 2, got {cap}")
    n = series.n
    if n <= cap:
        channels = tuple(
            DisplayChannel(name, series.timestamps, series.values[:, j])
            for j, name in enumerate(series.channel_names)
        )
        return DisplaySeries(channels=channels, cap=cap, source_length=n)
    bucket_size = math.ceil(n / (cap // 2))
    out = []
    for j, name in enumerate(series.channel_names):
        idx = _bucket_extreme_indices(series.values[:, j], bucket_size)
        out.append(
            DisplayChannel(
                name=name,
                timestamps=series.timestamps[idx],
                values=series.values[idx, j],
            )
        )
    return DisplaySeries(channels=tuple(out), cap=cap, source_length=n)


def window_range_for_point(
    i: int, w: int, stride: int = 1, m: Optional[int] = None
) -> Tuple[int, int]:
    """Inclusive time-index range covered by window ``i``."""
    if i < 0 or (m is not None and i >= m):
        raise IndexError(f"window index {i} out of range for {m} windows")
    start = i * stride
    return start, start + w - 1


def point_indices_for_time(
    t: int, w: int, stride: int = 1, m: Optional[int] = None, n: Optional[int] = None
) -> range:
    """Window indices whose range contains time index ``t``.

    Returns {i : i*stride <= t <= i*stride + w - 1, 0 <= i < m}; with stride 1
    this is the contiguous run [max(0, t-w+1), min(t, m-1)].
    """
    if t < 0 or (n is not None and t >= n):
        raise IndexError(f"time index {t} out of range for length {n}")
    lo = max(0, -((-(t - w + 1)) // stride))  # ceil((t-w+1)/stride)
    hi = t // stride
    if m is not None:
        hi = min(hi, m - 1)
    if hi < lo:
        return range(0)
    return range(lo, hi + 1)
