"""Parsers turning raw CSV/TXT/TSF bytes into TimeSeries values.

All parsers are single-pass and streaming: memory stays bounded by the
longest line plus the parsed output. TXT is CSV with a sniffed delimiter
(comma, semicolon, tab, or space). TSF follows the Monash archive layout:
``#`` comments, ``@``-directives, then ``@data`` with one series per line,
attribute fields joined by ``:`` and the trailing field a comma-separated
value list where ``?`` marks a missing value.
"""

from __future__ import annotations

import calendar
import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import DataError
from .series import TimeSeries

__all__ = [
    "ParsedDataset",
    "TsfHeader",
    "ParseError",
    "NonMonotoneTimestamps",
    "NoNumericColumns",
    "RaggedRows",
    "MissingDataSection",
    "UnknownFrequencyToken",
    "AttributeCountMismatch",
    "parse_csv",
    "parse_txt",
    "parse_tsf",
    "parse_bytes",
    "TSF_FREQUENCY_SECONDS",
]


class ParseError(DataError):
    """Input bytes do not form a valid dataset file."""


class NonMonotoneTimestamps(ParseError):
    pass


class NoNumericColumns(ParseError):
    pass


class RaggedRows(ParseError):
    pass


class MissingDataSection(ParseError):
    pass


class UnknownFrequencyToken(ParseError):
    pass


class AttributeCountMismatch(ParseError):
    pass


TSF_FREQUENCY_SECONDS = {
    "4_seconds": 4,
    "minutely": 60,
    "10_minutes": 600,
    "hourly": 3600,
    "daily": 86400,
}

_NS = 1_000_000_000


@dataclass(frozen=True)
class TsfHeader:
    """Directives read before the @data section of a TSF file."""

    attributes: Tuple[Tuple[str, str], ...]  # (name, kind) with kind in {string,date,numeric}
    frequency: Optional[str] = None
    horizon: Optional[int] = None
    missing: bool = False
    equallength: bool = False
    relation: Optional[str] = None


@dataclass(frozen=True)
class ParsedDataset:
    series: Tuple[TimeSeries, ...]
    source_format: str  # csv | txt | tsf
    name: str
    series_names: Tuple[str, ...]
    tsf_header: Optional[TsfHeader] = None

    def __post_init__(self) -> None:
        if not self.series:
            raise ParseError("dataset contains no series")
        if len(self.series_names) != len(self.series):
            raise ParseError("one name required per series")
        if len(set(self.series_names)) != len(self.series_names):
            raise ParseError("series names must be unique within a dataset")


def _timestamp_ns(token: str) -> int:
    """Parse an ISO-8601 timestamp (or integer index, as seconds) to epoch ns."""
    token = token.strip()
    try:
        return int(token) * _NS
    except ValueError:
        pass
    text = token.replace("Z", "+00:00")
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ParseError(f"unparseable timestamp {token!r}") from exc
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    return calendar.timegm(dt.timetuple()) * _NS + dt.microsecond * 1000


def _infer_frequency(timestamps: np.ndarray) -> Optional[Fraction]:
    if timestamps.shape[0] < 2:
        return None
    diffs = np.diff(timestamps)
    if np.all(diffs == diffs[0]):
        return Fraction(int(diffs[0]), _NS)
    return None


def _float_cell(cell: str) -> Optional[float]:
    cell = cell.strip()
    if cell == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        return None


def parse_csv(
    data: bytes,
    *,
    delimiter: str = ",",
    timestamp_column: Union[int, str] = 0,
    header: bool = True,
    name: str = "dataset",
    source_format: str = "csv",
) -> ParsedDataset:
    """Parse delimited text into a single multichannel TimeSeries.

    The timestamp column holds ISO-8601 timestamps or integer indices;
    integer indices synthesize timestamps at 1-second spacing from epoch 0.
    Every other column that parses as float throughout becomes a channel;
    empty cells become NaN; columns with non-numeric cells are dropped.
    """
    text = io.TextIOWrapper(io.BytesIO(data), encoding="utf-8", errors="replace")
    reader = csv.reader(text, delimiter=delimiter)

    col_names: Optional[List[str]] = None
    ts_index: Optional[int] = None
    timestamps: List[int] = []
    columns: List[Optional[List[float]]] = []
    width = 0

    try:
        for row in reader:
            if not row or (len(row) == 1 and row[0].strip() == ""):
                continue
            if col_names is None:
                width = len(row)
                if header:
                    col_names = [cell.strip() for cell in row]
                else:
                    col_names = [f"c{j}" for j in range(width)]
                if isinstance(timestamp_column, str):
                    if timestamp_column not in col_names:
                        raise ParseError(f"timestamp column {timestamp_column!r} not found")
                    ts_index = col_names.index(timestamp_column)
                else:
                    if not 0 <= timestamp_column < width:
                        raise ParseError(f"timestamp column index {timestamp_column} out of range")
                    ts_index = timestamp_column
                columns = [[] for _ in range(width)]
                columns[ts_index] = None
                if header:
                    continue
            if len(row) != width:
                raise RaggedRows(
                    f"row {len(timestamps) + 1} has {len(row)} cells, expected {width}"
                )
            timestamps.append(_timestamp_ns(row[ts_index]))
            for j, cell in enumerate(row):
                col = columns[j]
                if col is None:
                    continue
                value = _float_cell(cell)
                if value is None:
                    columns[j] = None  # non-numeric column: drop and stop storing
                else:
                    col.append(value)
    except csv.Error as exc:
        raise ParseError(f"malformed delimited text: {exc}")

    if col_names is None:
        raise NoNumericColumns("file contains no rows")
    channels = [
        (col_names[j], np.asarray(col, dtype=np.float64))
        for j, col in enumerate(columns)
        if col is not None
    ]
    if not channels or not timestamps:
        raise NoNumericColumns("no numeric value columns found")

    ts = np.asarray(timestamps, dtype=np.int64)
    if ts.shape[0] > 1 and not np.all(np.diff(ts) > 0):
        raise NonMonotoneTimestamps("timestamps must be strictly increasing")
    series = TimeSeries.from_channels(ts, channels, frequency_seconds=_infer_frequency(ts))
    return ParsedDataset(
        series=(series,), source_format=source_format, name=name, series_names=(name,)
    )


def sniff_delimiter(data: bytes) -> str:
    """Pick the most frequent of ',', ';', tab, space in the first data line."""
    for raw in data.splitlines():
        line = raw.decode("utf-8", errors="replace")
        if line.strip() and not line.lstrip().startswith("#"):
            counts = [(line.count(d), -i, d) for i, d in enumerate([",", ";", "\t", " "])]
            best = max(counts)
            return best[2] if best[0] > 0 else ","
    return ","


def parse_txt(
    data: bytes,
    *,
    timestamp_column: Union[int, str] = 0,
    header: bool = True,
    name: str = "dataset",
) -> ParsedDataset:
    return parse_csv(
        data,
        delimiter=sniff_delimiter(data),
        timestamp_column=timestamp_column,
        header=header,
        name=name,
        source_format="txt",
    )


def _tsf_date_ns(token: str) -> int:
    token = token.strip()
    try:
        dt = datetime.strptime(token, "%Y-%m-%d %H-%M-%S")
        return calendar.timegm(dt.timetuple()) * _NS
    except ValueError:
        return _timestamp_ns(token)


def parse_tsf(data: bytes, *, name: Optional[str] = None) -> ParsedDataset:
    """Parse a Monash-style .tsf file into one TimeSeries per data line.

    Series are named by the string attribute; the start timestamp comes from
    the date attribute when present, else epoch 0; subsequent timestamps are
    spaced by the declared @frequency (1 second when undeclared).
    """
    attributes: List[Tuple[str, str]] = []
    frequency_token: Optional[str] = None
    horizon: Optional[int] = None
    missing = False
    equallength = False
    relation: Optional[str] = None
    in_data = False

    names: List[str] = []
    series: List[TimeSeries] = []
    freq_seconds: Optional[int] = None

    text = io.TextIOWrapper(io.BytesIO(data), encoding="utf-8", errors="replace")
    for raw in text:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not in_data and line.startswith("@"):
            parts = line.split()
            directive = parts[0].lower()
            if directive == "@data":
                if not attributes:
                    raise MissingDataSection("@data reached before any @attribute")
                if frequency_token is not None:
                    if frequency_token not in TSF_FREQUENCY_SECONDS:
                        raise UnknownFrequencyToken(frequency_token)
                    freq_seconds = TSF_FREQUENCY_SECONDS[frequency_token]
                in_data = True
            elif directive == "@relation":
                relation = parts[1] if len(parts) > 1 else None
            elif directive == "@attribute":
                if len(parts) != 3:
                    raise ParseError(f"malformed attribute line: {line!r}")
                kind = parts[2].lower()
                if kind not in ("string", "date", "numeric"):
                    raise ParseError(f"unsupported attribute kind {kind!r}")
                attributes.append((parts[1], kind))
            elif directive == "@frequency":
                frequency_token = parts[1] if len(parts) > 1 else None
            elif directive == "@horizon":
                horizon = int(parts[1])
            elif directive == "@missing":
                missing = parts[1].lower() == "true"
            elif directive == "@equallength":
                equallength = parts[1].lower() == "true"
            continue
        if not in_data:
            raise MissingDataSection("data line before @data directive")

        fields = line.split(":")
        if len(fields) != len(attributes) + 1:
            raise AttributeCountMismatch(
                f"expected {len(attributes)} attribute fields + values, got {len(fields) - 1} + values"
            )
        series_name: Optional[str] = None
        start_ns = 0
        for (attr_name, kind), token in zip(attributes, fields[:-1]):
            if kind == "string" and series_name is None:
                series_name = token.strip()
            elif kind == "date":
                start_ns = _tsf_date_ns(token)
        tokens = [tok for tok in fields[-1].split(",")]
        if tokens == [""]:
            raise ParseError("series with empty value list")
        values = np.array(
            [math.nan if tok.strip() == "?" else float(tok) for tok in tokens],
            dtype=np.float64,
        )
        step = (freq_seconds or 1) * _NS
        timestamps = start_ns + step * np.arange(values.shape[0], dtype=np.int64)
        names.append(series_name if series_name is not None else f"series_{len(series) + 1}")
        series.append(
            TimeSeries.from_channels(
                timestamps,
                [("value", values)],
                frequency_seconds=freq_seconds,
            )
        )

    if not in_data:
        raise MissingDataSection("file has no @data directive")
    if not series:
        raise MissingDataSection("no series lines under @data")
    header = TsfHeader(
        attributes=tuple(attributes),
        frequency=frequency_token,
        horizon=horizon,
        missing=missing,
        equallength=equallength,
        relation=relation,
    )
    return ParsedDataset(
        series=tuple(series),
        source_format="tsf",
        name=name or relation or "tsf",
        series_names=tuple(names),
        tsf_header=header,
    )


def parse_bytes(data: bytes, filename: str, **options) -> ParsedDataset:
    """Dispatch on file extension: .csv, .txt, or .tsf."""
    stem, _, ext = filename.rpartition(".")
    base = (stem or filename).rsplit("/", 1)[-1]
    ext = ext.lower()
    if ext == "tsf":
        return parse_tsf(data, name=options.get("name", base))
    if ext == "txt":
        return parse_txt(data, name=options.get("name", base), **{k: v for k, v in options.items() if k != "name"})
    return parse_csv(data, name=options.get("name", base), **{k: v for k, v in options.items() if k != "name"})
