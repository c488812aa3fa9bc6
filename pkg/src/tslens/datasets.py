"""Dataset artifact payloads: text formats or the binary columnar container.

A stored dataset is either the uploaded file verbatim (CSV/TXT/TSF, parsed
on load) or a columnar table with a ``timestamp`` int64 column followed by
one float64 column per channel. The columnar route is bit-exact, so synthetic
and derived series survive storage without value drift.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Optional, Tuple

from .columnar import MAGIC, Table, read_columnar, write_columnar
from .errors import InvalidInput
from .ingest import ParsedDataset, parse_bytes
from .series import TimeSeries

__all__ = ["TIMESTAMP_COLUMN", "series_to_payload", "dataset_from_payload", "pick_series"]

TIMESTAMP_COLUMN = "timestamp"


def series_to_payload(series: TimeSeries, name: str) -> Tuple[bytes, Dict[str, str]]:
    """Columnar payload plus the metadata needed to reconstruct the series."""
    columns = [(TIMESTAMP_COLUMN, series.timestamps)]
    for channel, values in series.channels():
        if channel == TIMESTAMP_COLUMN:
            raise InvalidInput(f"channel name {TIMESTAMP_COLUMN!r} is reserved")
        columns.append((channel, values))
    metadata = {
        "format": "columnar",
        "series_name": name,
        "rows": str(series.n),
        "channels": str(series.channel_count),
    }
    if series.frequency_seconds is not None:
        metadata["frequency_seconds"] = str(Fraction(series.frequency_seconds))
    return write_columnar(Table(tuple(columns))), metadata


def _series_from_table(table: Table, metadata: Dict[str, str]) -> TimeSeries:
    timestamps = table.column(TIMESTAMP_COLUMN)
    channels = [(name, values) for name, values in table.columns if name != TIMESTAMP_COLUMN]
    freq_text = metadata.get("frequency_seconds")
    return TimeSeries(
        timestamps=timestamps,
        values=Table(tuple(channels)).to_matrix(),
        channel_names=tuple(name for name, _ in channels),
        frequency_seconds=None if freq_text is None else Fraction(freq_text),
    )


def dataset_from_payload(
    payload: bytes, metadata: Dict[str, str], default_name: str = "dataset"
) -> ParsedDataset:
    """Decode a stored dataset payload; dispatches on the magic bytes."""
    if payload[: len(MAGIC)] == MAGIC:
        name = metadata.get("series_name", default_name)
        series = _series_from_table(read_columnar(payload), metadata)
        return ParsedDataset(
            series=(series,),
            source_format="columnar",
            name=name,
            series_names=(name,),
        )
    filename = metadata.get("filename", f"{default_name}.csv")
    return parse_bytes(payload, filename)


def pick_series(dataset: ParsedDataset, series_name: Optional[str]) -> TimeSeries:
    """Select one series by name; default is the first in file order."""
    if series_name is None:
        return dataset.series[0]
    for name, series in zip(dataset.series_names, dataset.series):
        if name == series_name:
            return series
    raise InvalidInput(
        f"series {series_name!r} not in dataset (has {', '.join(dataset.series_names)})"
    )
