"""HTTP API wrapping the pipeline, with feedback capture.

Endpoints: POST /cases, POST /feedback, GET /feedback/summary, GET /health.
All bodies are JSON. Served recommendations are cached (bounded LRU) so
feedback submissions can be validated against what the agent actually saw.
In silent mode the pipeline runs and logs but /cases returns 204 without
a body.
"""

from __future__ import annotations

import logging
import os
import time
from collections import OrderedDict
from pathlib import Path
from threading import Lock

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .classifier import LinearTurnModel
from .clients import clients_from_env
from .config import PipelineConfig, load_config_file
from .errors import PipelineError, TransportError
from .feedback import FEEDBACK_CATEGORIES, FeedbackRecord, FeedbackStore
from .models import Recommendation, SupportCase
from .pipeline import Pipeline, recommend
from .preprocess import ProductAliasTable
from .retrieval import load_index

logger = logging.getLogger(__name__)

ENV_FEEDBACK_PATH = "FEEDBACK_PATH"
ENV_INDEX_PATH = "INDEX_PATH"
ENV_SILENT_MODE = "SILENT_MODE"
ENV_CLASSIFIER_PATH = "CLASSIFIER_PATH"
ENV_ALIASES_PATH = "ALIASES_PATH"
ENV_UI_DIR = "UI_DIR"

RECOMMENDATION_CACHE_SIZE = 10_000

# Published response schema for POST /cases; every 200 body validates.
RECOMMENDATION_SCHEMA = {
    "type": "object",
    "required": ["case_id", "query_text", "status", "results"],
    "additionalProperties": False,
    "properties": {
        "case_id": {"type": "string", "minLength": 1},
        "query_text": {"type": "string"},
        "status": {"enum": ["ok", "not_single_turn", "no_results"]},
        "results": {
            "type": "array",
            "maxItems": 10,
            "items": {
                "type": "object",
                "required": [
                    "url",
                    "title",
                    "answer_text",
                    "insufficient_context",
                    "rerank_score",
                    "status",
                ],
                "additionalProperties": False,
                "properties": {
                    "url": {"type": "string", "minLength": 1},
                    "title": {"type": "string"},
                    "answer_text": {"type": "string"},
                    "insufficient_context": {"type": "boolean"},
                    "rerank_score": {"type": "number", "minimum": -1.0, "maximum": 1.0},
                    "status": {"type": "string"},
                },
            },
        },
    },
}


class CaseBody(BaseModel):
    case_id: str
    subject: str
    description: str = ""
    product_name: str = ""
    product_version: str = ""


class FeedbackBody(BaseModel):
    case_id: str
    result_index: int
    accuracy_stars: int
    readability_stars: int
    category: str
    comment: str = ""
    timestamp: int | None = None


class RecommendationCache:
    """Bounded LRU of served recommendations keyed by case_id."""

    def __init__(self, capacity: int = RECOMMENDATION_CACHE_SIZE) -> None:
        self._entries: OrderedDict[str, Recommendation] = OrderedDict()
        self._capacity = capacity
        self._lock = Lock()

    def put(self, rec: Recommendation) -> None:
        with self._lock:
            self._entries[rec.case_id] = rec
            self._entries.move_to_end(rec.case_id)
            while len(self._entries) > self._capacity:
                self._entries.popitem(last=False)

    def get(self, case_id: str) -> Recommendation | None:
        with self._lock:
            rec = self._entries.get(case_id)
            if rec is not None:
                self._entries.move_to_end(case_id)
            return rec


def create_app(
    pipeline: Pipeline,
    feedback_store: FeedbackStore,
    silent_mode: bool = False,
    ui_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="casesolve", version="0.1.0")
    cache = RecommendationCache()
    app.state.pipeline = pipeline
    app.state.feedback_store = feedback_store
    app.state.recommendation_cache = cache

    @app.exception_handler(RequestValidationError)
    async def invalid_body(request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/cases")
    def resolve_case(body: CaseBody) -> Response:
        try:
            case = SupportCase(
                case_id=body.case_id,
                subject=body.subject,
                description=body.description,
                product_name=body.product_name,
                product_version=body.product_version,
            )
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        try:
            rec = recommend(case, pipeline)
        except TransportError as exc:
            return JSONResponse(status_code=503, content={"detail": str(exc)})
        except PipelineError as exc:
            return JSONResponse(
                status_code=500, content={"detail": exc.message, "stage": exc.stage}
            )
        cache.put(rec)
        if silent_mode:
            logger.info("silent mode: case %s -> %s", rec.case_id, rec.status)
            return Response(status_code=204)
        return JSONResponse(status_code=200, content=rec.to_dict())

    @app.post("/feedback")
    def submit_feedback(body: FeedbackBody) -> Response:
        served = cache.get(body.case_id)
        if served is None:
            return JSONResponse(
                status_code=404, content={"detail": f"no served recommendation for case {body.case_id!r}"}
            )
        try:
            record = FeedbackRecord(
                case_id=body.case_id,
                result_index=body.result_index,
                accuracy_stars=body.accuracy_stars,
                readability_stars=body.readability_stars,
                category=body.category,
                comment=body.comment,
                timestamp=body.timestamp if body.timestamp is not None else int(time.time()),
            )
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        if record.result_index >= len(served.results):
            return JSONResponse(
                status_code=400,
                content={"detail": f"result_index {record.result_index} out of range for case {body.case_id!r}"},
            )
        appended = feedback_store.append(record)
        return JSONResponse(
            status_code=200, content={"persisted": True, "duplicate": not appended}
        )

    @app.get("/feedback/summary")
    def feedback_summary() -> dict:
        return feedback_store.summary().to_dict()

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def build_pipeline(
    index_path: str | Path,
    config: PipelineConfig | None = None,
    classifier_path: str | Path | None = None,
    aliases_path: str | Path | None = None,
    env: dict[str, str] | None = None,
) -> Pipeline:
    """Assemble a Pipeline from file paths and environment-selected clients."""
    config = config or PipelineConfig()
    return Pipeline(
        clients=clients_from_env(config.embedding_dim, env),
        collections=load_index(index_path),
        config=config,
        turn_model=LinearTurnModel.load(classifier_path) if classifier_path else None,
        alias_table=(
            ProductAliasTable.from_file(aliases_path) if aliases_path else ProductAliasTable.empty()
        ),
    )


def app_from_env() -> FastAPI:
    """Build the app purely from environment variables (uvicorn entry point)."""
    index_path = os.environ.get(ENV_INDEX_PATH)
    if not index_path:
        raise SystemExit(f"{ENV_INDEX_PATH} must point to an ingested index")
    config_path = os.environ.get("PIPELINE_CONFIG")
    config = load_config_file(config_path) if config_path else PipelineConfig()
    pipeline = build_pipeline(
        index_path,
        config=config,
        classifier_path=os.environ.get(ENV_CLASSIFIER_PATH) or None,
        aliases_path=os.environ.get(ENV_ALIASES_PATH) or None,
    )
    store = FeedbackStore(os.environ.get(ENV_FEEDBACK_PATH, "feedback.jsonl"))
    return create_app(
        pipeline,
        store,
        silent_mode=os.environ.get(ENV_SILENT_MODE, "") == "1",
        ui_dir=os.environ.get(ENV_UI_DIR) or None,
    )
