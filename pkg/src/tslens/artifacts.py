"""Local content-addressed artifact store.

Replaces a remote experiment-tracking backend with a plain directory tree:
one directory per kind, one subdirectory per artifact name, and per version
a payload file plus a flat ``key=value`` metadata sidecar. Artifact ids are
SHA-256 digests of the payload bytes; storing identical bytes under the same
name is idempotent and returns the existing version. Writers take an
advisory file lock per (kind, name) and publish files with atomic renames,
so readers never observe partial payloads.
"""

from __future__ import annotations

import fcntl
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import DataError, InvalidInput, TsLensError
from .fingerprint import sha256_hex

__all__ = [
    "Artifact",
    "ArtifactStore",
    "ARTIFACT_KINDS",
    "NotFound",
    "DigestMismatch",
    "StorageIO",
]

ARTIFACT_KINDS = ("dataset", "encoder-config", "embeddings", "projections", "run-log")

_NAME_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]*$")
_RESERVED_META = ("id", "kind", "name", "version")


class NotFound(DataError):
    pass


class DigestMismatch(DataError):
    pass


class StorageIO(TsLensError):
    pass


@dataclass(frozen=True)
class Artifact:
    id: str
    kind: str
    name: str
    version: int
    metadata: Dict[str, str] = field(default_factory=dict)
    payload_path: str = ""


def _check_kind(kind: str) -> None:
    if kind not in ARTIFACT_KINDS:
        raise InvalidInput(f"unknown artifact kind {kind!r}; expected one of {ARTIFACT_KINDS}")


def _check_name(name: str) -> None:
    if not _NAME_RE.match(name):
        raise InvalidInput(f"artifact name {name!r} must match {_NAME_RE.pattern}")


class ArtifactStore:
    """Directory-backed versioned artifact store."""

    def __init__(self, root: os.PathLike | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _dir(self, kind: str, name: str) -> Path:
        return self.root / kind / name

    def put_artifact(
        self,
        kind: str,
        name: str,
        payload: bytes,
        metadata: Optional[Dict[str, str]] = None,
    ) -> Artifact:
        _check_kind(kind)
        _check_name(name)
        if not payload:
            raise InvalidInput("artifact payload must be non-empty")
        metadata = dict(metadata or {})
        for key, value in metadata.items():
            if key in _RESERVED_META:
                raise InvalidInput(f"metadata key {key!r} is reserved")
            if "\n" in key or "=" in key or "\n" in str(value):
                raise InvalidInput(f"metadata entry {key!r} contains forbidden characters")
        digest = sha256_hex(payload)
        directory = self._dir(kind, name)
        try:
            directory.mkdir(parents=True, exist_ok=True)
            with open(directory / ".lock", "w") as lock:
                fcntl.flock(lock, fcntl.LOCK_EX)
                for version in sorted(self._versions(directory), reverse=True):
                    existing = self._read_meta(kind, name, version)
                    if existing.id == digest:
                        return existing
                version = max(self._versions(directory), default=0) + 1
                artifact = Artifact(
                    id=digest,
                    kind=kind,
                    name=name,
                    version=version,
                    metadata=metadata,
                    payload_path=f"{kind}/{name}/v{version}.payload",
                )
                self._atomic_write(directory / f"v{version}.payload", payload)
                self._atomic_write(
                    directory / f"v{version}.meta", self._format_meta(artifact).encode("utf-8")
                )
                return artifact
        except OSError as exc:
            raise StorageIO(f"cannot store {kind}/{name}: {exc}") from exc

    def get_artifact(
        self, kind: str, name: str, version: Optional[int] = None
    ) -> Tuple[Artifact, bytes]:
        _check_kind(kind)
        directory = self._dir(kind, name)
        if version is None:
            versions = self._versions(directory)
            if not versions:
                raise NotFound(f"no artifact {kind}/{name}")
            version = max(versions)
        artifact = self._read_meta(kind, name, version)
        try:
            payload = (self.root / artifact.payload_path).read_bytes()
        except FileNotFoundError:
            raise NotFound(f"payload missing for {kind}/{name} v{version}")
        if sha256_hex(payload) != artifact.id:
            raise DigestMismatch(f"{kind}/{name} v{version} payload does not match its id")
        return artifact, payload

    def get_meta(self, kind: str, name: str, version: Optional[int] = None) -> Artifact:
        _check_kind(kind)
        if version is None:
            versions = self._versions(self._dir(kind, name))
            if not versions:
                raise NotFound(f"no artifact {kind}/{name}")
            version = max(versions)
        return self._read_meta(kind, name, version)

    def list_artifacts(self, kind: Optional[str] = None) -> List[Artifact]:
        kinds = [kind] if kind else list(ARTIFACT_KINDS)
        out: List[Artifact] = []
        for k in kinds:
            _check_kind(k)
            kind_dir = self.root / k
            if not kind_dir.is_dir():
                continue
            for name_dir in sorted(p for p in kind_dir.iterdir() if p.is_dir()):
                for version in sorted(self._versions(name_dir)):
                    out.append(self._read_meta(k, name_dir.name, version))
        return out

    @staticmethod
    def _versions(directory: Path) -> List[int]:
        if not directory.is_dir():
            return []
        out = []
        for path in directory.iterdir():
            match = re.match(r"^v(\d+)\.meta$", path.name)
            if match:
                out.append(int(match.group(1)))
        return out

    def _read_meta(self, kind: str, name: str, version: int) -> Artifact:
        meta_path = self._dir(kind, name) / f"v{version}.meta"
        try:
            text = meta_path.read_text("utf-8")
        except FileNotFoundError:
            raise NotFound(f"no artifact {kind}/{name} v{version}")
        fields: Dict[str, str] = {}
        for line in text.splitlines():
            if line:
                key, _, value = line.partition("=")
                fields[key] = value
        metadata = {k: v for k, v in fields.items() if k not in _RESERVED_META}
        return Artifact(
            id=fields["id"],
            kind=kind,
            name=name,
            version=version,
            metadata=metadata,
            payload_path=f"{kind}/{name}/v{version}.payload",
        )

    @staticmethod
    def _format_meta(artifact: Artifact) -> str:
        lines = [
            f"id={artifact.id}",
            f"kind={artifact.kind}",
            f"name={artifact.name}",
            f"version={artifact.version}",
        ]
        lines += [f"{k}={v}" for k, v in sorted(artifact.metadata.items())]
        return "\n".join(lines) + "\n"

    @staticmethod
    def _atomic_write(path: Path, data: bytes) -> None:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
