"""Persisted entropy pools: pre-fetched random bytes consumed exactly once.

File layout (all integers big-endian):

    bytes  0..15   magic block: b"QPOOL\\x00\\x00\\x00" padded to 16 bytes
    bytes 16..17   format version, u16
    bytes 18..23   reserved (zero)
    bytes 24..27   metadata length, u32
    ...            metadata, UTF-8 "key=value" lines
    ...            raw entropy payload

The consumption cursor lives in a sidecar file ``<pool>.cursor`` so that
consume-once semantics survive process restarts. Bit order within a byte is
MSB-first.
"""
from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .bits import BitBuffer
from .errors import PartialFillError, PoolExhaustedError, StorageError

MAGIC = b"QPOOL\x00\x00\x00" + b"\x00" * 8
VERSION = 1
_HEADER = struct.Struct(">16sH6xI")


@dataclass
class PoolMetadata:
    source_id: str
    created_at: str
    extractor: bool
    validation_id: str | None = None

    def encode(self) -> bytes:
        lines = [
            f"source={self.source_id}",
            f"created={self.created_at}",
            f"extractor={'true' if self.extractor else 'false'}",
        ]
        if self.validation_id:
            lines.append(f"validation={self.validation_id}")
        return ("\n".join(lines) + "\n").encode("utf-8")

    @classmethod
    def decode(cls, blob: bytes) -> "PoolMetadata":
        fields = {}
        for line in blob.decode("utf-8").splitlines():
            if line.strip():
                key, _, value = line.partition("=")
                fields[key] = value
        try:
            return cls(
                source_id=fields["source"],
                created_at=fields["created"],
                extractor=fields["extractor"] == "true",
                validation_id=fields.get("validation"),
            )
        except KeyError as exc:
            raise StorageError(f"pool metadata missing field {exc}") from exc


class EntropyPool:
    """Exclusive-access handle over a pool file; reads never overlap."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        try:
            with open(self.path, "rb") as fh:
                header = fh.read(_HEADER.size)
                if len(header) < _HEADER.size:
                    raise StorageError(f"{self.path}: truncated pool header")
                magic, version, meta_len = _HEADER.unpack(header)
                if magic != MAGIC:
                    raise StorageError(f"{self.path}: not a pool file")
                if version != VERSION:
                    raise StorageError(f"{self.path}: unsupported version {version}")
                meta_blob = fh.read(meta_len)
                if len(meta_blob) < meta_len:
                    raise StorageError(f"{self.path}: truncated metadata")
                self.metadata = PoolMetadata.decode(meta_blob)
                self._payload_offset = _HEADER.size + meta_len
                fh.seek(0, 2)
                self.total_bytes = fh.tell() - self._payload_offset
        except OSError as exc:
            raise StorageError(f"cannot open pool {self.path}: {exc}") from exc
        self.cursor = self._load_cursor()

    @property
    def _cursor_path(self) -> Path:
        return self.path.with_name(self.path.name + ".cursor")

    def _load_cursor(self) -> int:
        try:
            cursor = int(self._cursor_path.read_text())
        except FileNotFoundError:
            return 0
        except (OSError, ValueError) as exc:
            raise StorageError(f"bad cursor file for {self.path}: {exc}") from exc
        if not 0 <= cursor <= self.total_bytes:
            raise StorageError(f"cursor {cursor} outside pool of {self.total_bytes} bytes")
        return cursor

    def _save_cursor(self):
        self._cursor_path.write_text(str(self.cursor))

    @property
    def remaining_bytes(self) -> int:
        return self.total_bytes - self.cursor

    def read_raw(self, n_bytes: int) -> bytes:
        """Consume the next `n_bytes` bytes; never returns a byte twice."""
        if n_bytes < 0:
            raise ValueError("n_bytes must be non-negative")
        with self._lock:
            if n_bytes > self.remaining_bytes:
                raise PoolExhaustedError(n_bytes, self.remaining_bytes)
            if n_bytes == 0:
                return b""
            with open(self.path, "rb") as fh:
                fh.seek(self._payload_offset + self.cursor)
                payload = fh.read(n_bytes)
            if len(payload) != n_bytes:
                raise StorageError(f"{self.path}: payload shorter than header claims")
            self.cursor += n_bytes
            self._save_cursor()
            return payload

    def read(self, n_bytes: int) -> BitBuffer:
        """Consume bytes and expand them to bits, MSB first."""
        payload = self.read_raw(n_bytes)
        return BitBuffer.from_bytes(payload, origin=f"pool:{self.path.name}")

    def reset(self):
        """Rewind the cursor (testing/maintenance only; defeats consume-once)."""
        with self._lock:
            self.cursor = 0
            self._save_cursor()


def pool_create(
    path: str | Path,
    take_bytes,
    n_bytes: int,
    source_id: str,
    extractor: bool = False,
    validation_id: str | None = None,
    chunk_bytes: int = 1 << 22,
) -> EntropyPool:
    """Fill a new pool file from `take_bytes(n) -> bytes`.

    The provider may return fewer bytes than asked when exhausted; the pool
    is then not created and a partial-fill error reports what was obtained.
    """
    if n_bytes <= 0:
        raise ValueError("n_bytes must be positive")
    path = Path(path)
    meta = PoolMetadata(
        source_id=source_id,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        extractor=extractor,
        validation_id=validation_id,
    ).encode()
    header = _HEADER.pack(MAGIC, VERSION, len(meta))
    written = 0
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(meta)
            while written < n_bytes:
                want = min(chunk_bytes, n_bytes - written)
                chunk = take_bytes(want)
                fh.write(chunk)
                written += len(chunk)
                if len(chunk) < want:
                    break
    except OSError as exc:
        raise StorageError(f"cannot write pool {path}: {exc}") from exc
    if written < n_bytes:
        path.unlink(missing_ok=True)
        raise PartialFillError(n_bytes, written)
    cursor_path = path.with_name(path.name + ".cursor")
    cursor_path.unlink(missing_ok=True)
    return EntropyPool(path)
