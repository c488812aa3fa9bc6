"""Dependency-tracked memoization of the analysis pipeline.

Stage outputs are keyed by (stage, upstream output fingerprints, parameter
fingerprint), so a parameter change recomputes exactly the stages whose key
changed and nothing upstream of them. The stage graph is fixed:

    load -> windows -> embed -> project -> cluster -> display
    load -> display
    project -> display
    cluster -> display

Guarantees:

* Concurrent identical requests coalesce: one thread computes, the rest
  wait for that result.
* Failures are never cached; the stage error propagates as ComputeFailed
  (with the stage name attached) to every coalesced caller.
* Memory is bounded: entries are evicted least-recently-used once the
  stage-weighted byte total exceeds the budget. Expensive-to-recompute
  stages get a weight below 1 so their bytes consume less budget and they
  survive longer. The most recently inserted entry is never evicted.
* Caching is transparent: a cached value is the exact object the compute
  produced, so results are bit-identical with and without the cache.
"""

from __future__ import annotations

import sys
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, fields, is_dataclass
from typing import Callable, Dict, Optional, Set, Tuple

import numpy as np

from .errors import InvalidInput, TsLensError
from .fingerprint import fingerprint

__all__ = [
    "STAGES",
    "STAGE_EDGES",
    "DEFAULT_BUDGET_BYTES",
    "NodeKey",
    "StageStats",
    "CacheStats",
    "ComputeFailed",
    "ReactiveCache",
    "downstream_stages",
]

STAGES = ("load", "windows", "embed", "project", "cluster", "display")

STAGE_EDGES: Dict[str, Tuple[str, ...]] = {
    "load": ("windows", "display"),
    "windows": ("embed",),
    "embed": ("project",),
    "project": ("cluster", "display"),
    "cluster": ("display",),
    "display": (),
}

DEFAULT_BUDGET_BYTES = 2 * 1024**3

# Budget charge per byte. Cheap-to-recompute bulk (raw windows, embeddings)
# pays full price; projections and clusters are slow to rebuild, so their
# bytes are discounted and they stay resident longer.
STAGE_WEIGHTS = {
    "load": 1.0,
    "windows": 1.0,
    "embed": 1.0,
    "project": 0.1,
    "cluster": 0.1,
    "display": 0.5,
}


class ComputeFailed(TsLensError):
    """A stage computation raised; carries the stage name for error routing."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def downstream_stages(stage: str) -> Set[str]:
    """The stage itself plus everything reachable from it."""
    if stage not in STAGES:
        raise InvalidInput(f"unknown stage {stage!r}")
    seen = {stage}
    frontier = [stage]
    while frontier:
        for nxt in STAGE_EDGES[frontier.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


@dataclass(frozen=True)
class NodeKey:
    stage: str
    input_fingerprints: Tuple[str, ...]
    params_fingerprint: str

    def __post_init__(self) -> None:
        if self.stage not in STAGES:
            raise InvalidInput(f"unknown stage {self.stage!r}")
        object.__setattr__(self, "input_fingerprints", tuple(self.input_fingerprints))

    def node_fingerprint(self) -> str:
        """Output fingerprint of this node; stages are pure, so the key
        determines the output."""
        return fingerprint(
            {
                "stage": self.stage,
                "inputs": list(self.input_fingerprints),
                "params": self.params_fingerprint,
            }
        )


@dataclass
class StageStats:
    compute_count: int = 0
    hit_count: int = 0
    last_compute_duration: float = 0.0


@dataclass(frozen=True)
class CacheStats:
    per_stage: Dict[str, StageStats]

    def as_rows(self):
        return [
            {
                "stage": stage,
                "compute_count": s.compute_count,
                "hit_count": s.hit_count,
                "last_compute_duration": s.last_compute_duration,
            }
            for stage, s in ((st, self.per_stage[st]) for st in STAGES)
        ]


def _size_bytes(value) -> int:
    if value is None:
        return 0
    if isinstance(value, np.ndarray):
        return value.nbytes
    if isinstance(value, (bytes, bytearray)):
        return len(value)
    if isinstance(value, str):
        return len(value.encode("utf-8"))
    if is_dataclass(value) and not isinstance(value, type):
        return sum(_size_bytes(getattr(value, f.name)) for f in fields(value))
    if isinstance(value, dict):
        return sum(_size_bytes(k) + _size_bytes(v) for k, v in value.items())
    if isinstance(value, (list, tuple, set, frozenset)):
        return sum(_size_bytes(v) for v in value)
    return sys.getsizeof(value)


class _Entry:
    __slots__ = ("value", "charge")

    def __init__(self, value, charge: float):
        self.value = value
        self.charge = charge


class _InFlight:
    __slots__ = ("event", "value", "error")

    def __init__(self):
        self.event = threading.Event()
        self.value = None
        self.error: Optional[ComputeFailed] = None


class ReactiveCache:
    """Thread-safe memoization keyed by NodeKey with LRU byte bounding."""

    def __init__(self, budget_bytes: int = DEFAULT_BUDGET_BYTES):
        if budget_bytes < 1:
            raise InvalidInput("budget_bytes must be positive")
        self.budget_bytes = budget_bytes
        self._lock = threading.Lock()
        self._entries: "OrderedDict[NodeKey, _Entry]" = OrderedDict()
        self._inflight: Dict[NodeKey, _InFlight] = {}
        self._charged = 0.0
        self._stats = {stage: StageStats() for stage in STAGES}

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def __contains__(self, key: NodeKey) -> bool:
        with self._lock:
            return key in self._entries

    def get_or_compute(self, key: NodeKey, compute: Callable[[], object]):
        while True:
            with self._lock:
                entry = self._entries.get(key)
                if entry is not None:
                    self._entries.move_to_end(key)
                    self._stats[key.stage].hit_count += 1
                    return entry.value
                flight = self._inflight.get(key)
                if flight is None:
                    flight = _InFlight()
                    self._inflight[key] = flight
                    break
            flight.event.wait()
            if flight.error is not None:
                raise flight.error
            with self._lock:
                self._stats[key.stage].hit_count += 1
            return flight.value

        start = time.monotonic()
        try:
            value = compute()
        except BaseException as exc:
            failure = ComputeFailed(key.stage, exc)
            flight.error = failure
            with self._lock:
                self._inflight.pop(key, None)
            flight.event.set()
            raise failure from exc
        duration = time.monotonic() - start
        with self._lock:
            stats = self._stats[key.stage]
            stats.compute_count += 1
            stats.last_compute_duration = duration
            self._insert(key, value)
            self._inflight.pop(key, None)
        flight.value = value
        flight.event.set()
        return value

    def _insert(self, key: NodeKey, value) -> None:
        charge = _size_bytes(value) * STAGE_WEIGHTS[key.stage]
        old = self._entries.pop(key, None)
        if old is not None:
            self._charged -= old.charge
        self._entries[key] = _Entry(value, charge)
        self._charged += charge
        while self._charged > self.budget_bytes and len(self._entries) > 1:
            _, evicted = self._entries.popitem(last=False)
            self._charged -= evicted.charge

    def invalidate_downstream(self, stage: str) -> Set[NodeKey]:
        doomed_stages = downstream_stages(stage)
        with self._lock:
            evicted = {k for k in self._entries if k.stage in doomed_stages}
            for k in evicted:
                self._charged -= self._entries.pop(k).charge
            return evicted

    def stats(self) -> CacheStats:
        with self._lock:
            return CacheStats(
                per_stage={
                    stage: StageStats(s.compute_count, s.hit_count, s.last_compute_duration)
                    for stage, s in self._stats.items()
                }
            )
