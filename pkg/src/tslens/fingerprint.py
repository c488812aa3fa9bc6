"""Canonical parameter serialization and SHA-256 fingerprints.

Fingerprints drive the memoization graph, so the serialization must be
stable: dict keys sorted, floats rendered with ``repr`` (shortest exact
round trip for IEEE doubles), Fractions as ``p/q``, containers in order.
"""

from __future__ import annotations

import dataclasses
import hashlib
from fractions import Fraction
from typing import Any

__all__ = ["canonical_text", "fingerprint", "sha256_hex"]


def canonical_text(obj: Any) -> str:
    if obj is None or isinstance(obj, bool):
        return repr(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return repr(obj)
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, bytes):
        return "0x" + obj.hex()
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_text(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{canonical_text(k)}:{canonical_text(v)}" for k, v in items) + "}"
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        fields = {f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)}
        return type(obj).__name__ + canonical_text(fields)
    raise TypeError(f"cannot canonicalize {type(obj).__name__}")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def fingerprint(obj: Any) -> str:
    """SHA-256 hex digest of the canonical serialization of ``obj``."""
    return sha256_hex(canonical_text(obj).encode("utf-8"))
