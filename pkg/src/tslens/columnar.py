"""Bit-exact binary columnar file format for series, embeddings, and labels.

Layout (all integers little-endian):

    magic   4 bytes  ASCII "DVCF"
    version u32      = 1
    n_cols  u32
    n_rows  u64
    n_cols column descriptors:
        name_len u16, UTF-8 name bytes, dtype tag u8 (0=float64, 1=int64)
    column data, column-major (column 0 fully, then column 1, ...)
    crc32   u32      CRC-32 of every preceding byte

Round trips are bit-exact, including NaN payload bits, because values are
moved as raw memory and never pass through arithmetic.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import DataError, InvalidInput

__all__ = [
    "Table",
    "BadMagic",
    "CrcMismatch",
    "TruncatedFile",
    "write_columnar",
    "read_columnar",
    "DTYPE_FLOAT64",
    "DTYPE_INT64",
]

MAGIC = b"DVCF"
FORMAT_VERSION = 1
DTYPE_FLOAT64 = 0
DTYPE_INT64 = 1

_TAG_TO_DTYPE = {DTYPE_FLOAT64: np.dtype("<f8"), DTYPE_INT64: np.dtype("<i8")}
_KIND_TO_TAG = {"f": DTYPE_FLOAT64, "i": DTYPE_INT64}


class BadMagic(DataError):
    pass


class CrcMismatch(DataError):
    pass


class TruncatedFile(DataError):
    """Byte length disagrees with the declared sizes (short or trailing)."""


@dataclass(frozen=True)
class Table:
    """Rectangular named-column container, dtypes float64 or int64."""

    columns: Tuple[Tuple[str, np.ndarray], ...]

    def __post_init__(self) -> None:
        cols: List[Tuple[str, np.ndarray]] = []
        n_rows = None
        for name, values in self.columns:
            arr = np.ascontiguousarray(values)
            if arr.ndim != 1:
                raise InvalidInput(f"column {name!r} must be one-dimensional")
            if arr.dtype.kind not in _KIND_TO_TAG or arr.dtype.itemsize != 8:
                raise InvalidInput(f"column {name!r} dtype {arr.dtype} unsupported")
            if n_rows is None:
                n_rows = arr.shape[0]
            elif arr.shape[0] != n_rows:
                raise InvalidInput("columns must share one length")
            cols.append((name, arr))
        object.__setattr__(self, "columns", tuple(cols))

    @property
    def n_rows(self) -> int:
        return self.columns[0][1].shape[0] if self.columns else 0

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    def column(self, name: str) -> np.ndarray:
        for col_name, values in self.columns:
            if col_name == name:
                return values
        raise KeyError(name)

    @staticmethod
    def from_matrix(data: np.ndarray, prefix: str = "c") -> "Table":
        data = np.asarray(data)
        return Table(tuple((f"{prefix}{j}", data[:, j]) for j in range(data.shape[1])))

    def to_matrix(self) -> np.ndarray:
        return np.column_stack([values for _, values in self.columns])


def write_columnar(table: Table) -> bytes:
    parts = [MAGIC, struct.pack("<IIQ", FORMAT_VERSION, table.n_cols, table.n_rows)]
    for name, values in table.columns:
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise InvalidInput(f"column name too long: {name!r}")
        tag = _KIND_TO_TAG[values.dtype.kind]
        parts.append(struct.pack("<H", len(encoded)) + encoded + struct.pack("<B", tag))
    for _, values in table.columns:
        parts.append(np.ascontiguousarray(values, dtype=values.dtype.newbyteorder("<")).tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def read_columnar(data: bytes) -> Table:
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic("not a DVCF columnar file")
    if len(data) < 4 + 16 + 4:
        raise TruncatedFile("file shorter than fixed header plus checksum")
    version, n_cols, n_rows = struct.unpack_from("<IIQ", data, 4)
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported columnar version {version}")
    offset = 4 + 16
    names: List[str] = []
    dtypes: List[np.dtype] = []
    for _ in range(n_cols):
        if offset + 2 > len(data):
            raise TruncatedFile("descriptor extends past end of file")
        (name_len,) = struct.unpack_from("<H", data, offset)
        offset += 2
        if offset + name_len + 1 > len(data):
            raise TruncatedFile("descriptor extends past end of file")
        names.append(data[offset : offset + name_len].decode("utf-8"))
        offset += name_len
        tag = data[offset]
        offset += 1
        if tag not in _TAG_TO_DTYPE:
            raise DataError(f"unknown dtype tag {tag}")
        dtypes.append(_TAG_TO_DTYPE[tag])
    expected = offset + 8 * n_rows * n_cols + 4
    if len(data) < expected:
        raise TruncatedFile(f"expected {expected} bytes, found {len(data)}")
    if len(data) > expected:
        raise TruncatedFile(f"trailing bytes: expected {expected}, found {len(data)}")
    (stored_crc,) = struct.unpack_from("<I", data, expected - 4)
    actual_crc = zlib.crc32(data[: expected - 4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise CrcMismatch(f"crc {actual_crc:08x} != stored {stored_crc:08x}")
    columns = []
    for name, dtype in zip(names, dtypes):
        end = offset + 8 * n_rows
        values = np.frombuffer(data[offset:end], dtype=dtype).copy()
        columns.append((name, values))
        offset = end
    return Table(tuple(columns))
