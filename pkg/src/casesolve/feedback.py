"""Agent feedback capture: validated records, durable store, aggregation."""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

FEEDBACK_CATEGORIES = (
    "useful",
    "somewhat_useful",
    "no_useful_suggestion",
    "need_more_client_info",
)


@dataclass(frozen=True)
class FeedbackRecord:
    """One agent rating of one recommendation card."""

    case_id: str
    result_index: int
    accuracy_stars: int
    readability_stars: int
    category: str
    comment: str = ""
    timestamp: int = 0  # UTC seconds

    def __post_init__(self) -> None:
        if not self.case_id:
            raise ValueError("case_id must be nonempty")
        if self.result_index < 0:
            raise ValueError("result_index must be >= 0")
        for axis, stars in (("accuracy", self.accuracy_stars), ("readability", self.readability_stars)):
            if not 1 <= stars <= 5:
                raise ValueError(f"{axis}_stars must be within 1-5, got {stars}")
        if self.category not in FEEDBACK_CATEGORIES:
            raise ValueError(f"category must be one of {FEEDBACK_CATEGORIES}, got {self.category!r}")

    def key(self) -> tuple[str, int, int]:
        return (self.case_id, self.result_index, self.timestamp)

    def to_dict(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "result_index": self.result_index,
            "accuracy_stars": self.accuracy_stars,
            "readability_stars": self.readability_stars,
            "category": self.category,
            "comment": self.comment,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "FeedbackRecord":
        return cls(
            case_id=str(raw["case_id"]),
            result_index=int(raw["result_index"]),
            accuracy_stars=int(raw["accuracy_stars"]),
            readability_stars=int(raw["readability_stars"]),
            category=str(raw["category"]),
            comment=str(raw.get("comment", "")),
            timestamp=int(raw.get("timestamp", 0)),
        )


@dataclass(frozen=True)
class FeedbackSummary:
    """Per-category counts/proportions and mean stars per axis."""

    total: int
    category_counts: dict[str, int]
    category_proportions: dict[str, float]
    mean_accuracy_stars: float | None
    mean_readability_stars: float | None

    def to_dict(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "category_counts": self.category_counts,
            "category_proportions": self.category_proportions,
            "mean_accuracy_stars": self.mean_accuracy_stars,
            "mean_readability_stars": self.mean_readability_stars,
        }


def summarize(records: list[FeedbackRecord]) -> FeedbackSummary:
    counts = {category: 0 for category in FEEDBACK_CATEGORIES}
    for record in records:
        counts[record.category] += 1
    total = len(records)
    proportions = {
        category: (count / total if total else 0.0) for category, count in counts.items()
    }
    return FeedbackSummary(
        total=total,
        category_counts=counts,
        category_proportions=proportions,
        mean_accuracy_stars=(
            sum(r.accuracy_stars for r in records) / total if total else None
        ),
        mean_readability_stars=(
            sum(r.readability_stars for r in records) / total if total else None
        ),
    )


class FeedbackStore:
    """Append-only JSONL persistence with a single serialized writer.

    Appends are flushed and fsynced before they are acknowledged, and
    replaying an identical (case_id, result_index, timestamp) key is a
    no-op, so retried submissions cannot double-count.
    """

    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)
        self._lock = threading.Lock()
        self._keys: set[tuple[str, int, int]] = set()
        self._records: list[FeedbackRecord] = []
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if not line.strip():
                    continue
                record = FeedbackRecord.from_dict(json.loads(line))
                if record.key() not in self._keys:
                    self._keys.add(record.key())
                    self._records.append(record)

    def append(self, record: FeedbackRecord) -> bool:
        """Persist a record durably; returns False for an idempotent replay."""
        with self._lock:
            if record.key() in self._keys:
                return False
            with open(self.path, "a", encoding="utf-8") as handle:
                handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
                handle.flush()
                os.fsync(handle.fileno())
            self._keys.add(record.key())
            self._records.append(record)
            return True

    def records(self) -> list[FeedbackRecord]:
        with self._lock:
            return list(self._records)

    def summary(self) -> FeedbackSummary:
        return summarize(self.records())
