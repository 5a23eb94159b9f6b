"""Multi-collection dense retrieval, re-ranking, and link-identity dedup.

First-pass search is exact brute-force cosine over per-collection document
embeddings (desk-scale corpora need no approximate index, and exactness
keeps every ranking reproducible). Per-collection top-k lists are merged
into a global top-k, re-ranked by a second embedder over the combined
case+question text, then deduplicated under link identity: normalized URL
equality, canonical-link equality, or near-identical content by unigram
overlap.
"""

from __future__ import annotations

import heapq
import json
import logging
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import urlsplit, urlunsplit

import numpy as np

from .clients import Embedder, cosine, normalize
from .config import PipelineConfig
from .errors import ConfigError
from .models import SupportCase
from .preprocess import ProductAliasTable, clean_text, expand_product
from .querygen import Query

logger = logging.getLogger(__name__)

# Document-side embedding input: title plus this many leading content tokens.
DOC_EMBED_TOKEN_LIMIT = 512


@dataclass(frozen=True)
class DocumentRecord:
    """One corpus document: URLs, title, tokenized content, embedding."""

    doc_id: str
    url: str
    title: str
    content: tuple[str, ...]
    collection_id: str
    embedding: np.ndarray
    canonical_url: str | None = None

    def __post_init__(self) -> None:
        if not self.url:
            raise ValueError(f"document {self.doc_id}: url must be nonempty")

    def embed_text(self) -> str:
        return doc_embed_text(self.title, self.content)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DocumentRecord):
            return NotImplemented
        return (self.doc_id, self.collection_id) == (other.doc_id, other.collection_id)

    def __hash__(self) -> int:
        return hash((self.doc_id, self.collection_id))


def doc_embed_text(title: str, content: Sequence[str]) -> str:
    head = " ".join(content[:DOC_EMBED_TOKEN_LIMIT])
    return f"{title}\n{head}" if head else title


class Collection:
    """An immutable set of documents sharing one embedding space."""

    def __init__(self, collection_id: str, documents: Sequence[DocumentRecord]) -> None:
        dims = {doc.embedding.shape for doc in documents}
        if len(dims) > 1:
            raise ConfigError(f"collection {collection_id}: mixed embedding dimensions {dims}")
        self.collection_id = collection_id
        self.documents = tuple(documents)
        self._matrix = (
            np.stack([doc.embedding for doc in documents]) if documents else np.zeros((0, 0))
        )

    def __len__(self) -> int:
        return len(self.documents)


@dataclass(frozen=True)
class ScoredDoc:
    document: DocumentRecord
    score: float
    origin_collection: str

    def __post_init__(self) -> None:
        if not -1.0 <= self.score <= 1.0:
            raise ValueError(f"score must be in [-1, 1], got {self.score}")


def _parse_corpus_row(raw: dict, lineno: int) -> dict:
    for field in ("doc_id", "url", "title", "text", "collection"):
        if field not in raw:
            raise ValueError(f"line {lineno}: missing field {field!r}")
    return raw


def ingest_corpus(path: str | Path, embedder: Embedder) -> list[Collection]:
    """Read a JSONL corpus and build one Collection per collection id.

    Rows: ``{doc_id, url, canonical_url?, title, text, collection}``.
    Content is cleaned and whitespace-tokenized; the embedding covers the
    title plus the first 512 content tokens. Duplicate doc_ids within a
    collection are rejected, as are malformed rows (with line numbers).
    """
    grouped: dict[str, list[DocumentRecord]] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = _parse_corpus_row(json.loads(line), lineno)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON: {exc}") from exc
        collection_id = str(raw["collection"])
        doc_id = str(raw["doc_id"])
        if (collection_id, doc_id) in seen:
            raise ValueError(f"line {lineno}: duplicate doc_id {doc_id!r} in collection {collection_id!r}")
        seen.add((collection_id, doc_id))
        tokens = tuple(clean_text(str(raw["text"])).split())
        title = clean_text(str(raw["title"]))
        embedding = embedder.embed(doc_embed_text(title, tokens))
        canonical = raw.get("canonical_url")
        grouped.setdefault(collection_id, []).append(
            DocumentRecord(
                doc_id=doc_id,
                url=str(raw["url"]),
                title=title,
                content=tokens,
                collection_id=collection_id,
                embedding=embedding,
                canonical_url=str(canonical) if canonical else None,
            )
        )
    return [Collection(cid, docs) for cid, docs in grouped.items()]


def save_index(collections: Sequence[Collection], path: str | Path) -> None:
    """Persist collections as JSONL records with their embedding arrays."""
    with open(path, "w", encoding="utf-8") as handle:
        for collection in collections:
            for doc in collection.documents:
                handle.write(
                    json.dumps(
                        {
                            "doc_id": doc.doc_id,
                            "url": doc.url,
                            "canonical_url": doc.canonical_url,
                            "title": doc.title,
                            "text": " ".join(doc.content),
                            "collection": doc.collection_id,
                            "embedding": [float(v) for v in doc.embedding],
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )


def load_index(path: str | Path) -> list[Collection]:
    """Load collections persisted by :func:`save_index`."""
    grouped: dict[str, list[DocumentRecord]] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON: {exc}") from exc
        grouped.setdefault(str(raw["collection"]), []).append(
            DocumentRecord(
                doc_id=str(raw["doc_id"]),
                url=str(raw["url"]),
                title=str(raw["title"]),
                content=tuple(str(raw["text"]).split()),
                collection_id=str(raw["collection"]),
                embedding=normalize(np.asarray(raw["embedding"], dtype=np.float64)),
                canonical_url=raw.get("canonical_url") or None,
            )
        )
    return [Collection(cid, docs) for cid, docs in grouped.items()]


def search_collection(query_vec: np.ndarray, collection: Collection, k: int) -> list[ScoredDoc]:
    """Exact top-k by cosine score, descending; ties broken by doc_id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not collection.documents:
        return []
    if collection._matrix.shape[1] != query_vec.shape[0]:
        raise ConfigError(
            f"collection {collection.collection_id}: dimension "
            f"{collection._matrix.shape[1]} vs query {query_vec.shape[0]}"
        )
    scores = collection._matrix @ np.asarray(query_vec, dtype=np.float64)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], collection.documents[i].doc_id))
    return [
        ScoredDoc(
            document=collection.documents[i],
            score=float(np.clip(scores[i], -1.0, 1.0)),
            origin_collection=collection.collection_id,
        )
        for i in order[:k]
    ]


def fuse(per_collection: Sequence[Sequence[ScoredDoc]], k: int) -> list[ScoredDoc]:
    """Merge per-collection sorted lists into the global top-k.

    Equivalent to sorting the concatenated union by score descending with
    ties broken by input-list order then doc_id, truncated to k.
    """
    streams = [
        # Inputs are score-descending but their tie order is unspecified;
        # canonicalize per stream so the k-way merge key is monotone.
        sorted(
            ((-item.score, list_index, item.document.doc_id, item) for item in results),
            key=lambda entry: entry[:3],
        )
        for list_index, results in enumerate(per_collection)
    ]
    merged = heapq.merge(*streams, key=lambda entry: entry[:3])
    return [entry[3] for _, entry in zip(range(k), merged)]


def build_rerank_text(case_text: str, query_text: str) -> str:
    """Second-pass query representation: derived question first, then the case."""
    if not case_text or not query_text:
        raise ValueError("case_text and query_text must be nonempty")
    return f"{query_text}\n{case_text}"


def rerank(
    case_text: str,
    query: Query,
    candidates: Sequence[ScoredDoc],
    rerank_embedder: Embedder,
) -> list[ScoredDoc]:
    """Reorder candidates by recomputed cosine under the re-rank embedder.

    The document set is unchanged; scores are replaced, and equal scores
    keep their prior order.
    """
    if not candidates:
        raise ValueError("candidates must be nonempty")
    query_vec = rerank_embedder.embed(build_rerank_text(case_text, query.text))
    rescored = [
        replace(
            item,
            score=cosine(query_vec, rerank_embedder.embed(item.document.embed_text())),
        )
        for item in candidates
    ]
    return sorted(rescored, key=lambda item: -item.score)


def rouge1_f1(candidate_tokens: Sequence[str], reference_tokens: Sequence[str]) -> float:
    """Unigram-overlap F1 with clipped counts; 0.0 when either side is empty."""
    if not candidate_tokens or not reference_tokens:
        return 0.0
    overlap = sum((Counter(candidate_tokens) & Counter(reference_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(candidate_tokens)
    recall = overlap / len(reference_tokens)
    return 2.0 * precision * recall / (precision + recall)


def normalize_url(url: str) -> str:
    """Lowercase scheme/host, strip the fragment and any trailing slash."""
    parts = urlsplit(url.strip())
    path = parts.path.rstrip("/")
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), path, parts.query, ""))


def links_match(a: DocumentRecord, b: DocumentRecord, threshold: float) -> bool:
    """True when two documents are the same page under link identity.

    Identity holds on normalized-URL equality, canonical-link equality,
    a canonical matching the other's URL, or content unigram-overlap F1 at
    or above ``threshold``. Reflexive and symmetric, but NOT transitive
    (content similarity can chain), so dedup must group greedily.
    """
    url_a, url_b = normalize_url(a.url), normalize_url(b.url)
    if url_a == url_b:
        return True
    canon_a = normalize_url(a.canonical_url) if a.canonical_url else None
    canon_b = normalize_url(b.canonical_url) if b.canonical_url else None
    if canon_a and canon_b and canon_a == canon_b:
        return True
    if canon_a and canon_a == url_b:
        return True
    if canon_b and canon_b == url_a:
        return True
    return rouge1_f1(a.content, b.content) >= threshold


def dedup_results(results: Sequence[ScoredDoc], threshold: float) -> list[ScoredDoc]:
    """Keep the first occurrence of each link-identity group, preserving order."""
    kept: list[ScoredDoc] = []
    for item in results:
        if not any(links_match(item.document, other.document, threshold) for other in kept):
            kept.append(item)
    return kept


def retrieve(
    case: SupportCase,
    query: Query,
    collections: Sequence[Collection],
    base_embedder: Embedder,
    rerank_embedder: Embedder,
    config: PipelineConfig,
    alias_table: ProductAliasTable | None = None,
) -> list[ScoredDoc]:
    """End-to-end retrieval for one case.

    Product aliases are appended to the query text for the first-pass
    search only; the re-rank text combines the derived question with the
    original case text. Returns at most ``final_k`` deduplicated documents.
    """
    if all(len(c) == 0 for c in collections):
        logger.warning("retrieve: all collections are empty for case %s", case.case_id)
        return []

    search_text = query.text
    if case.product_name:
        expansion = expand_product(case.product_name, alias_table or ProductAliasTable.empty())
        search_text = f"{query.text} {' '.join(expansion)}"

    query_vec = base_embedder.embed(search_text)
    per_collection = [
        search_collection(query_vec, collection, config.per_collection_k)
        for collection in collections
    ]
    fused = fuse(per_collection, config.final_k)
    if not fused:
        return []
    case_text = case.cleaned_text or case.subject
    reranked = rerank(case_text, query, fused, rerank_embedder)
    deduped = dedup_results(reranked, config.link_identity_rouge1_threshold)
    return deduped[: config.final_k]


def iter_documents(collections: Iterable[Collection]) -> Iterable[DocumentRecord]:
    for collection in collections:
        yield from collection.documents
