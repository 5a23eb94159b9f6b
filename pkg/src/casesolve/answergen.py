"""Grounded answer generation over chunked documents.

Each retrieved document is split into overlapping token windows; the most
relevant windows (by cosine against the query embedding) become numbered
contexts for the generator, whose prompt carries an explicit instruction
to refuse when the contexts are insufficient.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from typing import Sequence

import numpy as np

from .clients import Embedder, GenerationParams, Generator, REFUSAL_MARKER, cosine
from .config import PipelineConfig
from .querygen import Query
from .retrieval import DocumentRecord

ANSWER_PROMPT_VERSION = "answer_v1"
ANSWER_PARAMS = GenerationParams(max_tokens=512, temperature=0.0)

_ANSWER_TEMPLATE = (
    resources.files("casesolve.prompts").joinpath(f"{ANSWER_PROMPT_VERSION}.txt").read_text(encoding="utf-8")
)


@dataclass(frozen=True)
class Chunk:
    """A token window of one document; embedding is attached before selection."""

    doc_id: str
    start_token: int
    token_count: int
    text: str
    embedding: np.ndarray | None = None

    def with_embedding(self, embedding: np.ndarray) -> "Chunk":
        return replace(self, embedding=embedding)


@dataclass(frozen=True)
class Answer:
    query_text: str
    url: str
    answer_text: str
    insufficient_context: bool
    contexts_used: tuple[tuple[str, int], ...]  # (doc_id, start_token) refs

    def __post_init__(self) -> None:
        if not self.answer_text:
            raise ValueError("answer_text must be nonempty")


def chunk_document(content: Sequence[str], size: int, overlap: int) -> list[Chunk]:
    """Split tokens into windows of ``size`` sharing ``overlap`` tokens.

    Window i starts at i*(size-overlap); generation stops with the first
    window whose end reaches the document length, so every token is
    covered and consecutive windows share exactly ``overlap`` tokens
    except possibly the clamped final one.
    """
    if not 0 <= overlap < size:
        raise ValueError("require 0 <= overlap < size")
    if not content:
        raise ValueError("cannot chunk empty content")
    doc_id = ""  # filled by chunk_records; bare spans otherwise
    stride = size - overlap
    chunks: list[Chunk] = []
    start = 0
    while True:
        end = min(start + size, len(content))
        tokens = content[start:end]
        chunks.append(
            Chunk(doc_id=doc_id, start_token=start, token_count=len(tokens), text=" ".join(tokens))
        )
        if end >= len(content):
            break
        start += stride
    return chunks


def chunk_count(length: int, size: int, overlap: int) -> int:
    """Closed form for the number of windows over ``length`` tokens."""
    if length <= size:
        return 1
    stride = size - overlap
    return -(-(length - size) // stride) + 1


def chunk_records(doc: DocumentRecord, config: PipelineConfig) -> list[Chunk]:
    return [
        replace(chunk, doc_id=doc.doc_id)
        for chunk in chunk_document(doc.content, config.chunk_size_tokens, config.chunk_overlap_tokens)
    ]


def select_contexts(query_vec: np.ndarray, chunks: Sequence[Chunk], n: int) -> list[Chunk]:
    """Top-n chunks by cosine against the query, ties by start position."""
    if not chunks:
        raise ValueError("chunks must be nonempty")
    if n < 1:
        raise ValueError("n must be >= 1")
    if any(chunk.embedding is None for chunk in chunks):
        raise ValueError("all chunks must carry embeddings before selection")
    scored = sorted(
        chunks,
        key=lambda chunk: (-cosine(query_vec, chunk.embedding), chunk.start_token),
    )
    return scored[:n]


def build_answer_prompt(query_text: str, contexts: Sequence[Chunk]) -> str:
    """Numbered-context prompt with the fixed refusal instruction."""
    if not contexts:
        raise ValueError("need at least one context")
    blocks = [f"Context {i}:\n{chunk.text}" for i, chunk in enumerate(contexts, start=1)]
    return _ANSWER_TEMPLATE.format(contexts="\n\n".join(blocks), query_text=query_text)


def generate_answer(
    query: Query,
    doc: DocumentRecord,
    embedder: Embedder,
    generator: Generator,
    config: PipelineConfig,
) -> Answer:
    """Chunk the document, select contexts, and generate a grounded answer.

    ``insufficient_context`` is set iff the refusal marker appears in the
    completion. The query and each chunk are embedded exactly once.
    """
    if not doc.content:
        raise ValueError(f"document {doc.doc_id} has no content")
    chunks = chunk_records(doc, config)
    embedded = [chunk.with_embedding(embedder.embed(chunk.text)) for chunk in chunks]
    query_vec = embedder.embed(query.text)
    contexts = select_contexts(query_vec, embedded, config.n_contexts)
    completion = generator.generate(build_answer_prompt(query.text, contexts), ANSWER_PARAMS)
    return Answer(
        query_text=query.text,
        url=doc.url,
        answer_text=completion.strip(),
        insufficient_context=REFUSAL_MARKER in completion,
        contexts_used=tuple((chunk.doc_id, chunk.start_token) for chunk in contexts),
    )
