"""End-to-end case resolution: classify, distill, retrieve, answer."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from .classifier import LinearTurnModel, classify, score_single_turn
from .clients import ModelClients
from .config import PipelineConfig
from .errors import PipelineError
from .models import (
    MULTI_TURN,
    Recommendation,
    RecommendationResult,
    STATUS_NO_RESULTS,
    STATUS_NOT_SINGLE_TURN,
    STATUS_OK,
    SupportCase,
)
from .answergen import generate_answer
from .preprocess import ProductAliasTable, preprocess_case
from .querygen import generate_query
from .retrieval import Collection, retrieve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Pipeline:
    """Everything a case run needs: models, corpus, and configuration.

    A zero-weight turn model scores 0.5 everywhere, which passes the 0.1
    gate; deployments train and load a real model via the CLI.
    """

    clients: ModelClients
    collections: Sequence[Collection]
    config: PipelineConfig = PipelineConfig()
    turn_model: LinearTurnModel | None = None
    alias_table: ProductAliasTable = field(default_factory=ProductAliasTable.empty)

    def resolved_turn_model(self) -> LinearTurnModel:
        if self.turn_model is not None:
            return self.turn_model
        return LinearTurnModel.zeros(
            self.config.embedding_dim,
            self.clients.base_embedder.embedder_id,
            self.config.single_turn_threshold,
        )


def recommend(case: SupportCase, pipeline: Pipeline) -> Recommendation:
    """Run the full pipeline for one case.

    Multi-turn cases short-circuit with status ``not_single_turn`` rather
    than erroring: gating is an expected outcome, not a failure. Whole-stage
    failures raise PipelineError naming the stage; per-document answer
    failures degrade to per-result statuses as long as one answer succeeds.
    """
    config = pipeline.config

    try:
        prepared = case if case.cleaned_text else preprocess_case(case)
    except ValueError as exc:
        raise PipelineError("preprocess", str(exc)) from exc

    try:
        model = pipeline.resolved_turn_model()
        score = score_single_turn(prepared.cleaned_text, model, pipeline.clients.base_embedder)
        turn = classify(score, config.single_turn_threshold)
    except Exception as exc:
        raise PipelineError("classify", str(exc)) from exc
    if turn == MULTI_TURN:
        return Recommendation(
            case_id=case.case_id, query_text="", results=(), status=STATUS_NOT_SINGLE_TURN
        )

    try:
        query = generate_query(prepared, pipeline.clients.generator)
    except Exception as exc:
        raise PipelineError("query", str(exc)) from exc

    try:
        ranked = retrieve(
            prepared,
            query,
            pipeline.collections,
            pipeline.clients.base_embedder,
            pipeline.clients.rerank_embedder,
            config,
            pipeline.alias_table,
        )
    except Exception as exc:
        raise PipelineError("retrieve", str(exc)) from exc
    if not ranked:
        return Recommendation(
            case_id=case.case_id, query_text=query.text, results=(), status=STATUS_NO_RESULTS
        )

    results: list[RecommendationResult] = []
    failures = 0
    for item in ranked:
        try:
            answer = generate_answer(
                query, item.document, pipeline.clients.base_embedder,
                pipeline.clients.generator, config,
            )
            results.append(
                RecommendationResult(
                    url=item.document.url,
                    title=item.document.title,
                    answer_text=answer.answer_text,
                    insufficient_context=answer.insufficient_context,
                    rerank_score=item.score,
                )
            )
        except Exception as exc:
            failures += 1
            logger.warning("answer generation failed for %s: %s", item.document.doc_id, exc)
            results.append(
                RecommendationResult(
                    url=item.document.url,
                    title=item.document.title,
                    answer_text="",
                    insufficient_context=False,
                    rerank_score=item.score,
                    status=f"error: {exc}",
                )
            )
    if failures == len(ranked):
        raise PipelineError("answer", "answer generation failed for every retrieved document")

    return Recommendation(
        case_id=case.case_id,
        query_text=query.text,
        results=tuple(results),
        status=STATUS_OK,
    )
