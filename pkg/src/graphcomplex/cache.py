"""Content-addressed on-disk persistence for bases, matrices, and tables.

Payloads are wrapped in a small header carrying a version stamp and a 64-bit
checksum; a stamp mismatch reads as absent, a checksum mismatch is an error
(a silently truncated matrix would yield plausible wrong ranks downstream).
Writes are atomic (temp file + rename), so concurrent writers race benignly.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass

CODE_VERSION = "1"

_KINDS = ("basis", "matrix", "table")


class CacheError(OSError):
    """I/O or integrity failure, with path context."""


@dataclass(frozen=True)
class CacheKey:
    kind: str
    family: str
    d: int
    g: int
    degree: int | None
    field: str
    version: str = CODE_VERSION

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"cache kind must be one of {_KINDS}")

    def filename(self) -> str:
        deg = "" if self.degree is None else str(self.degree)
        raw = f"{self.family};d={self.d};g={self.g};k={deg};f={self.field};v={self.version}"
        safe = raw.replace(":", "_").replace(";", "_").replace("=", "-")
        return safe + ".dat"


def _checksum(payload: bytes) -> str:
    return hashlib.blake2b(payload, digest_size=8).hexdigest()


class CacheStore:
    """Filesystem store at ``<root>/<kind>/<key>.dat``."""

    def __init__(self, root):
        self.root = str(root)

    def _path(self, key: CacheKey) -> str:
        return os.path.join(self.root, key.kind, key.filename())

    def store(self, key: CacheKey, payload: bytes) -> None:
        path = self._path(key)
        header = f"gcx1 {key.version} {_checksum(payload)}\n".encode()
        try:
            os.makedirs(os.path.dirname(path), exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(header + payload)
                os.replace(tmp, path)
            finally:
                if os.path.exists(tmp):
                    os.unlink(tmp)
        except OSError as exc:
            raise CacheError(f"cache write failed for {path}: {exc}") from exc

    def load(self, key: CacheKey) -> bytes | None:
        path = self._path(key)
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except FileNotFoundError:
            return None
        except OSError as exc:
            raise CacheError(f"cache read failed for {path}: {exc}") from exc
        nl = blob.find(b"\n")
        if nl < 0 or not blob.startswith(b"gcx1 "):
            raise CacheError(f"corrupted cache header in {path}")
        magic, version, digest = blob[:nl].decode().split(" ")
        payload = blob[nl + 1 :]
        if version != key.version:
            return None
        if digest != _checksum(payload):
            raise CacheError(f"checksum mismatch in {path}")
        return payload


def store_from_env(cli_value=None):
    """Cache root from a CLI value or the GRAPHCOMPLEX_CACHE variable."""
    root = cli_value or os.environ.get("GRAPHCOMPLEX_CACHE")
    return CacheStore(root) if root else None
