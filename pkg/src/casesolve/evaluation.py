"""Offline evaluation: recall under link identity, answer overlap, agreement.

Reproduces the deployed system's measurement procedures against a local
corpus: classifier precision/recall/F1, recall@n where a hit is any top-n
link matching any acceptable ground-truth link, LCS-based answer overlap
against annotated solutions, rubric averaging, and the proportion of items
three annotators agreed on.

Ground truth carries a LIST of acceptable links per case; a single-link
dataset is just the degenerate case.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .classifier import classifier_metrics, classify, score_single_turn
from .models import MULTI_TURN, SINGLE_TURN, SupportCase
from .pipeline import Pipeline
from .answergen import generate_answer
from .preprocess import preprocess_case
from .querygen import generate_query
from .retrieval import (
    Collection,
    DocumentRecord,
    iter_documents,
    links_match,
    normalize_url,
    retrieve,
)

logger = logging.getLogger(__name__)

# Tokenization used for answer-overlap scoring, recorded in every report
# header so scores stay comparable across runs.
ROUGE_TOKENIZATION = "lowercase, whitespace split, punctuation stripped"

RUBRIC_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)

_PUNCT_RE = re.compile(r"[^\w\s]")


def rouge_tokenize(text: str) -> list[str]:
    return _PUNCT_RE.sub(" ", text.lower()).split()


def rougeL_f1(candidate_tokens: Sequence[str], reference_tokens: Sequence[str]) -> float:
    """LCS-based F1: P = LCS/|cand|, R = LCS/|ref|; 0.0 when degenerate."""
    if not candidate_tokens or not reference_tokens:
        return 0.0
    lcs = _lcs_length(candidate_tokens, reference_tokens)
    if lcs == 0:
        return 0.0
    precision = lcs / len(candidate_tokens)
    recall = lcs / len(reference_tokens)
    return 2.0 * precision * recall / (precision + recall)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Single-row dynamic program; quadratic time, linear space.
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class EvalCase:
    """One annotated case: turn label plus optional query/links/answer truth."""

    case: SupportCase
    gt_single_turn: str
    gt_query: str | None = None
    gt_links: tuple[DocumentRecord, ...] = ()
    gt_answer: str | None = None

    def __post_init__(self) -> None:
        if self.gt_single_turn not in (SINGLE_TURN, MULTI_TURN):
            raise ValueError(f"gt_single_turn must be single_turn or multi_turn, got {self.gt_single_turn!r}")
        if self.gt_single_turn == MULTI_TURN and (
            self.gt_query or self.gt_links or self.gt_answer
        ):
            raise ValueError(
                f"case {self.case.case_id}: query/link/answer truth only applies to single-turn cases"
            )


def bare_link(url: str) -> DocumentRecord:
    """A URL-only document reference for ground truth not found in the corpus."""
    return DocumentRecord(
        doc_id=f"gt:{normalize_url(url)}",
        url=url,
        title="",
        content=(),
        collection_id="gt",
        embedding=np.zeros(0),
    )


def resolve_gt_link(url: str, collections: Sequence[Collection]) -> DocumentRecord:
    """Find the corpus document for a ground-truth URL, or a bare reference.

    Resolution against the corpus lets content-based identity participate
    in recall, not just URL equality.
    """
    wanted = normalize_url(url)
    for doc in iter_documents(collections):
        if normalize_url(doc.url) == wanted:
            return doc
        if doc.canonical_url and normalize_url(doc.canonical_url) == wanted:
            return doc
    return bare_link(url)


def load_dataset(path: str | Path, collections: Sequence[Collection] = ()) -> list[EvalCase]:
    """Read JSONL rows ``{case, gt_single_turn, gt_query?, gt_links, gt_answer?}``."""
    cases = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            cases.append(
                EvalCase(
                    case=SupportCase.from_dict(raw["case"]),
                    gt_single_turn=str(raw["gt_single_turn"]),
                    gt_query=raw.get("gt_query") or None,
                    gt_links=tuple(
                        resolve_gt_link(url, collections) for url in raw.get("gt_links", [])
                    ),
                    gt_answer=raw.get("gt_answer") or None,
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return cases


def recall_hit(
    ranked: Sequence[DocumentRecord],
    eval_case: EvalCase,
    n: int,
    threshold: float,
) -> bool:
    """True iff any of the top-n links matches ANY acceptable ground-truth link."""
    if not eval_case.gt_links:
        raise ValueError(f"case {eval_case.case.case_id} has no ground-truth links")
    return any(
        links_match(doc, gt, threshold) for doc in ranked[:n] for gt in eval_case.gt_links
    )


def hit_rank(
    ranked: Sequence[DocumentRecord], eval_case: EvalCase, threshold: float
) -> int | None:
    """1-based rank of the first link matching ground truth, or None."""
    for rank, doc in enumerate(ranked, start=1):
        if any(links_match(doc, gt, threshold) for gt in eval_case.gt_links):
            return rank
    return None


def recall_at_n(
    per_case_results: Sequence[Sequence[DocumentRecord]],
    eval_cases: Sequence[EvalCase],
    n: int,
    threshold: float,
) -> float:
    """Aggregate recall@n: hits over cases that have ground-truth links.

    Cases without links are excluded from the denominator (the caller
    reports their count separately).
    """
    if len(per_case_results) != len(eval_cases):
        raise ValueError("results and cases must be parallel sequences")
    hits = 0
    eligible = 0
    for ranked, eval_case in zip(per_case_results, eval_cases):
        if not eval_case.gt_links:
            continue
        eligible += 1
        if recall_hit(ranked, eval_case, n, threshold):
            hits += 1
    return hits / eligible if eligible else 0.0


def rubric_average(scores: Sequence[float]) -> float:
    """Mean of 5-level rubric scores in {0, 0.25, 0.5, 0.75, 1}."""
    if not scores:
        raise ValueError("scores must be nonempty")
    bad = [s for s in scores if s not in RUBRIC_LEVELS]
    if bad:
        raise ValueError(f"scores outside rubric levels {RUBRIC_LEVELS}: {bad}")
    return sum(scores) / len(scores)


@dataclass(frozen=True)
class AgreementResult:
    proportion: float
    n: int

    def __str__(self) -> str:
        return f"{self.proportion:.2f} ({self.n})"


def agreement_proportion(annotations: Sequence[Sequence[str]]) -> AgreementResult:
    """Fraction of items on which all three annotators gave the same label."""
    if not annotations:
        raise ValueError("annotations must be nonempty")
    for i, labels in enumerate(annotations):
        if len(labels) != 3:
            raise ValueError(f"item {i}: expected exactly 3 labels, got {len(labels)}")
    unanimous = sum(1 for labels in annotations if len(set(labels)) == 1)
    return AgreementResult(proportion=unanimous / len(annotations), n=len(annotations))


@dataclass(frozen=True)
class EvalReport:
    """Aggregated evaluation results; serializes to deterministic JSON."""

    classifier: dict[str, float]
    recall_at: dict[int, float]
    rougeL_mean: float | None
    rubric_mean: float | None
    counts: dict[str, int]
    rouge_tokenization: str = ROUGE_TOKENIZATION

    def __post_init__(self) -> None:
        values = [self.recall_at[n] for n in sorted(self.recall_at)]
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError("recall_at must be non-decreasing in n")
        ratios = list(self.classifier.values()) + values
        if self.rougeL_mean is not None:
            ratios.append(self.rougeL_mean)
        if self.rubric_mean is not None:
            ratios.append(self.rubric_mean)
        if any(not 0.0 <= r <= 1.0 for r in ratios):
            raise ValueError("all report ratios must be in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "classifier": self.classifier,
            "recall_at": {str(n): v for n, v in sorted(self.recall_at.items())},
            "rougeL_mean": self.rougeL_mean,
            "rubric_mean": self.rubric_mean,
            "counts": self.counts,
            "rouge_tokenization": self.rouge_tokenization,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def evaluate_pipeline(
    dataset: Sequence[EvalCase],
    pipeline: Pipeline,
    n_values: Sequence[int] = (1, 3, 5, 10),
    trace_path: str | Path | None = None,
    rubric_scores: Sequence[float] | None = None,
) -> EvalReport:
    """Run classifier and pipeline over a dataset and aggregate all metrics.

    The classifier is scored on every case; the retrieval/answer stages run
    on cases annotated single-turn, ranked deep enough to cover max(n).
    Per-case failures land in the trace and the failure count; they never
    abort the run. With mock clients the report and trace are byte-stable
    across runs (no timestamps, sorted keys).
    """
    if not n_values:
        raise ValueError("n_values must be nonempty")
    n_values = sorted(set(n_values))
    config = pipeline.config
    depth = max(max(n_values), config.final_k)
    deep_config = replace(
        config,
        final_k=depth,
        per_collection_k=max(config.per_collection_k, depth),
    )
    deep_pipeline = Pipeline(
        clients=pipeline.clients,
        collections=pipeline.collections,
        config=deep_config,
        turn_model=pipeline.turn_model,
        alias_table=pipeline.alias_table,
    )
    threshold = config.link_identity_rouge1_threshold
    model = pipeline.resolved_turn_model()

    predictions: list[str] = []
    labels: list[str] = []
    ranked_per_case: list[list[DocumentRecord]] = []
    link_cases: list[EvalCase] = []
    rouge_scores: list[float] = []
    counts = {
        "total": len(dataset),
        "gt_single_turn": 0,
        "gt_multi_turn": 0,
        "predicted_single_turn": 0,
        "gated_not_single_turn": 0,
        "pipeline_runs": 0,
        "cases_without_gt_links": 0,
        "answers_scored": 0,
        "gt_doc_not_retrieved": 0,
        "failures": 0,
    }
    trace_rows: list[dict[str, Any]] = []

    for eval_case in dataset:
        row: dict[str, Any] = {"case_id": eval_case.case.case_id}
        try:
            prepared = preprocess_case(eval_case.case)
            score = score_single_turn(
                prepared.cleaned_text, model, pipeline.clients.base_embedder
            )
            predicted = classify(score, config.single_turn_threshold)
        except Exception as exc:
            counts["failures"] += 1
            row["error"] = f"classify: {exc}"
            trace_rows.append(row)
            continue

        predictions.append(predicted)
        labels.append(eval_case.gt_single_turn)
        counts["gt_single_turn" if eval_case.gt_single_turn == SINGLE_TURN else "gt_multi_turn"] += 1
        if predicted == SINGLE_TURN:
            counts["predicted_single_turn"] += 1
        else:
            counts["gated_not_single_turn"] += 1
        row.update(
            {
                "gt_single_turn": eval_case.gt_single_turn,
                "predicted": predicted,
                "score": round(score, 6),
            }
        )

        if eval_case.gt_single_turn != SINGLE_TURN:
            trace_rows.append(row)
            continue

        try:
            counts["pipeline_runs"] += 1
            query = generate_query(prepared, pipeline.clients.generator)
            results = retrieve(
                prepared,
                query,
                pipeline.collections,
                pipeline.clients.base_embedder,
                pipeline.clients.rerank_embedder,
                deep_config,
                pipeline.alias_table,
            )
            ranked_docs = [item.document for item in results]
            row["query"] = query.text
            row["ranked"] = [
                {"url": doc.url, "score": round(item.score, 6)}
                for doc, item in zip(ranked_docs, results)
            ]
            if eval_case.gt_query:
                row["query_rougeL"] = round(
                    rougeL_f1(rouge_tokenize(query.text), rouge_tokenize(eval_case.gt_query)), 6
                )

            if eval_case.gt_links:
                link_cases.append(eval_case)
                ranked_per_case.append(ranked_docs)
                rank = hit_rank(ranked_docs, eval_case, threshold)
                row["hit_rank"] = rank
            else:
                counts["cases_without_gt_links"] += 1

            if eval_case.gt_answer and ranked_docs:
                row["answer_rougeL"] = _score_answer(
                    eval_case, query, results, deep_pipeline, row, counts, rouge_scores
                )
        except Exception as exc:
            counts["failures"] += 1
            row["error"] = f"pipeline: {exc}"
        trace_rows.append(row)

    classifier = (
        classifier_metrics(predictions, labels)
        if predictions
        else {"precision": 0.0, "recall": 0.0, "f1": 0.0, "positive_rate": 0.0}
    )
    recall_at = {
        n: recall_at_n(ranked_per_case, link_cases, n, threshold) for n in n_values
    }
    report = EvalReport(
        classifier=classifier,
        recall_at=recall_at,
        rougeL_mean=sum(rouge_scores) / len(rouge_scores) if rouge_scores else None,
        rubric_mean=rubric_average(rubric_scores) if rubric_scores else None,
        counts=counts,
    )
    if trace_path is not None:
        write_trace(trace_rows, trace_path)
    return report


def _score_answer(eval_case, query, results, pipeline, row, counts, rouge_scores):
    """Score the answer grounded in the ground-truth document when retrieved.

    Falls back to the top-ranked document's answer (flagging the mismatch)
    when retrieval missed every acceptable link.
    """
    threshold = pipeline.config.link_identity_rouge1_threshold
    target = None
    for item in results:
        if any(links_match(item.document, gt, threshold) for gt in eval_case.gt_links):
            target = item
            break
    if target is None:
        target = results[0]
        counts["gt_doc_not_retrieved"] += 1
        row["gt_doc_retrieved"] = False
    else:
        row["gt_doc_retrieved"] = True
    answer = generate_answer(
        query, target.document, pipeline.clients.base_embedder,
        pipeline.clients.generator, pipeline.config,
    )
    score = rougeL_f1(rouge_tokenize(answer.answer_text), rouge_tokenize(eval_case.gt_answer))
    counts["answers_scored"] += 1
    rouge_scores.append(score)
    row["answer_insufficient_context"] = answer.insufficient_context
    return round(score, 6)


def write_trace(rows: Iterable[dict[str, Any]], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")
