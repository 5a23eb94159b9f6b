"""Shared domain types: support cases and recommendations.

All types are immutable values, safe to share across concurrent tasks,
and round-trip losslessly through their ``to_dict``/``from_dict`` pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping

SINGLE_TURN = "single_turn"
MULTI_TURN = "multi_turn"

# Recommendation status values.
STATUS_OK = "ok"
STATUS_NOT_SINGLE_TURN = "not_single_turn"
STATUS_NO_RESULTS = "no_results"

# Cleaned text may contain printable ASCII plus the newline that separates
# the subject from the description.
_ALLOWED_CLEANED = {"\n"} | {chr(c) for c in range(0x20, 0x7F)}


@dataclass(frozen=True)
class SupportCase:
    """A raw support ticket plus its derived cleaned text.

    ``cleaned_text`` stays empty until preprocessing runs; once set it holds
    the cleaned subject and description joined by a single newline.
    """

    case_id: str
    subject: str
    description: str = ""
    product_name: str = ""
    product_version: str = ""
    cleaned_text: str = ""

    def __post_init__(self) -> None:
        if not self.case_id:
            raise ValueError("case_id must be nonempty")
        if not self.subject:
            raise ValueError("subject must be nonempty")
        bad = {ch for ch in self.cleaned_text if ch not in _ALLOWED_CLEANED}
        if bad:
            raise ValueError(f"cleaned_text contains disallowed characters: {sorted(bad)!r}")

    def with_cleaned_text(self, cleaned: str) -> "SupportCase":
        return replace(self, cleaned_text=cleaned)

    def to_dict(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "subject": self.subject,
            "description": self.description,
            "product_name": self.product_name,
            "product_version": self.product_version,
            "cleaned_text": self.cleaned_text,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "SupportCase":
        return cls(
            case_id=str(raw.get("case_id", "")),
            subject=str(raw.get("subject", "")),
            description=str(raw.get("description", "")),
            product_name=str(raw.get("product_name", "")),
            product_version=str(raw.get("product_version", "")),
            cleaned_text=str(raw.get("cleaned_text", "")),
        )


@dataclass(frozen=True)
class RecommendationResult:
    """One recommended link with its grounded answer and re-rank score."""

    url: str
    title: str
    answer_text: str
    insufficient_context: bool
    rerank_score: float
    status: str = "ok"

    def to_dict(self) -> dict[str, Any]:
        return {
            "url": self.url,
            "title": self.title,
            "answer_text": self.answer_text,
            "insufficient_context": self.insufficient_context,
            "rerank_score": self.rerank_score,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "RecommendationResult":
        return cls(
            url=str(raw["url"]),
            title=str(raw.get("title", "")),
            answer_text=str(raw.get("answer_text", "")),
            insufficient_context=bool(raw.get("insufficient_context", False)),
            rerank_score=float(raw.get("rerank_score", 0.0)),
            status=str(raw.get("status", "ok")),
        )


@dataclass(frozen=True)
class Recommendation:
    """Final output for one case: the distilled query plus ranked results.

    Results are sorted by ``rerank_score`` descending and hold no duplicate
    links. When the case is gated as multi-turn, ``status`` is
    ``not_single_turn`` and ``results`` is empty.
    """

    case_id: str
    query_text: str
    results: tuple[RecommendationResult, ...] = field(default_factory=tuple)
    status: str = STATUS_OK

    def __post_init__(self) -> None:
        scores = [r.rerank_score for r in self.results]
        if any(a < b for a, b in zip(scores, scores[1:])):
            raise ValueError("results must be sorted by rerank_score descending")

    def to_dict(self) -> dict[str, Any]:
        return {
            "case_id": self.case_id,
            "query_text": self.query_text,
            "status": self.status,
            "results": [r.to_dict() for r in self.results],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "Recommendation":
        return cls(
            case_id=str(raw["case_id"]),
            query_text=str(raw.get("query_text", "")),
            results=tuple(RecommendationResult.from_dict(r) for r in raw.get("results", [])),
            status=str(raw.get("status", STATUS_OK)),
        )
