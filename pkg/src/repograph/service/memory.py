"""Episodic memory: an append-only JSON-lines event log.

Two event kinds share the file: full answer records and feedback
attachments keyed by record id. Appends are single full-line writes with
fsync, so a crash can at worst leave one torn trailing line, which the
loader skips; records already acknowledged are never lost or corrupted.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA_VERSION = 1


@dataclass
class EpisodicRecord:
    record_id: int
    timestamp: float
    query: str
    decision: dict
    answer: dict                      # {"ranked": [[node_id, score], ...]}
    feedback: dict | None = None      # {"rating": "up"|"down", "comment": str}
    latency_ms: float = 0.0

    def as_dict(self) -> dict:
        return {
            "record_id": self.record_id, "timestamp": self.timestamp,
            "query": self.query, "decision": self.decision,
            "answer": self.answer, "feedback": self.feedback,
            "latency_ms": self.latency_ms,
        }


class FeedbackConflict(Exception):
    """Different feedback already recorded for this record."""


class UnknownRecord(KeyError):
    pass


class EpisodicStore:
    """Append-only store with one mutable field (feedback) per record."""

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._records: dict[int, EpisodicRecord] = {}
        self._order: list[int] = []
        self._next_id = 1
        if self.path.exists():
            self._replay()

    def _replay(self) -> None:
        for line in self.path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            try:
                event = json.loads(line)
            except json.JSONDecodeError:
                continue  # torn trailing line from a crash mid-append
            if event.get("kind") == "answer":
                rec = EpisodicRecord(
                    record_id=event["record_id"],
                    timestamp=event["timestamp"],
                    query=event["query"], decision=event["decision"],
                    answer=event["answer"],
                    latency_ms=event.get("latency_ms", 0.0))
                self._records[rec.record_id] = rec
                self._order.append(rec.record_id)
                self._next_id = max(self._next_id, rec.record_id + 1)
            elif event.get("kind") == "feedback":
                rec = self._records.get(event["record_id"])
                if rec is not None:
                    rec.feedback = {"rating": event["rating"],
                                    "comment": event.get("comment")}

    def _append_line(self, payload: dict) -> None:
        line = json.dumps(payload, sort_keys=True, ensure_ascii=False) + "\n"
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    def append_answer(self, query: str, decision: dict, answer: dict,
                      latency_ms: float = 0.0) -> EpisodicRecord:
        with self._lock:
            rec = EpisodicRecord(
                record_id=self._next_id, timestamp=time.time(), query=query,
                decision=decision, answer=answer, latency_ms=latency_ms)
            self._next_id += 1
            self._append_line({"kind": "answer", "schema_version": SCHEMA_VERSION,
                               **rec.as_dict()})
            self._records[rec.record_id] = rec
            self._order.append(rec.record_id)
            return rec

    def add_feedback(self, record_id: int, rating: str,
                     comment: str | None = None) -> EpisodicRecord:
        if rating not in ("up", "down"):
            raise ValueError(f"rating must be 'up' or 'down', got {rating!r}")
        with self._lock:
            rec = self._records.get(record_id)
            if rec is None:
                raise UnknownRecord(record_id)
            new = {"rating": rating, "comment": comment}
            if rec.feedback is not None:
                if rec.feedback == new:
                    return rec  # idempotent re-submission
                raise FeedbackConflict(record_id)
            self._append_line({"kind": "feedback",
                               "schema_version": SCHEMA_VERSION,
                               "record_id": record_id, "rating": rating,
                               "comment": comment})
            rec.feedback = new
            return rec

    def get(self, record_id: int) -> EpisodicRecord:
        rec = self._records.get(record_id)
        if rec is None:
            raise UnknownRecord(record_id)
        return rec

    def list(self, since: float | None = None,
             backend: str | None = None) -> list[EpisodicRecord]:
        out = []
        for rid in self._order:
            rec = self._records[rid]
            if since is not None and rec.timestamp < since:
                continue
            if backend is not None and \
                    rec.decision.get("backend", "").lower() != backend.lower():
                continue
            out.append(rec)
        return out

    def __len__(self) -> int:
        return len(self._order)
