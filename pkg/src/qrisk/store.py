"""Single-directory embedded persistence: sources, prices, portfolios,
an append-only job log, and per-job scenario blobs."""
from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import NotFoundError, StorageError

_STATUS_FLOW = {
    "queued": {"running"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass
class JobRecord:
    id: str
    config: dict
    status: str = "queued"
    result: dict | None = None
    error: dict | None = None
    created: str = field(default_factory=_now)
    finished: str | None = None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "config": self.config,
            "status": self.status,
            "result": self.result,
            "error": self.error,
            "created": self.created,
            "finished": self.finished,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "JobRecord":
        return cls(**data)


class JobStore:
    """Append-only job log; the last snapshot of an id wins on reload."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "returns").mkdir(exist_ok=True)
        self._log_path = self.data_dir / "jobs.jsonl"
        self._lock = threading.Lock()
        self._jobs: dict[str, JobRecord] = {}
        if self._log_path.exists():
            for line in self._log_path.read_text().splitlines():
                if line.strip():
                    record = JobRecord.from_dict(json.loads(line))
                    self._jobs[record.id] = record

    def new_job(self, config: dict) -> JobRecord:
        record = JobRecord(id=uuid.uuid4().hex[:12], config=config)
        with self._lock:
            self._jobs[record.id] = record
            self._append(record)
        return record

    def get(self, job_id: str) -> JobRecord:
        try:
            return self._jobs[job_id]
        except KeyError:
            raise NotFoundError(f"unknown job {job_id!r}") from None

    def list(self) -> list[JobRecord]:
        return list(self._jobs.values())

    def transition(self, job_id: str, status: str,
                   result: dict | None = None, error: dict | None = None):
        with self._lock:
            record = self.get(job_id)
            if status not in _STATUS_FLOW[record.status]:
                raise StorageError(
                    f"illegal transition {record.status} -> {status}")
            record.status = status
            if result is not None:
                record.result = result
            if error is not None:
                record.error = error
            if status in ("done", "failed"):
                record.finished = _now()
            self._append(record)

    def _append(self, record: JobRecord):
        with open(self._log_path, "a") as fh:
            fh.write(json.dumps(record.to_dict()) + "\n")

    def save_returns(self, job_id: str, returns: np.ndarray):
        np.save(self.data_dir / "returns" / f"{job_id}.npy", returns)

    def load_returns(self, job_id: str) -> np.ndarray:
        path = self.data_dir / "returns" / f"{job_id}.npy"
        if not path.exists():
            raise NotFoundError(f"no scenario returns stored for job {job_id!r}")
        return np.load(path)
