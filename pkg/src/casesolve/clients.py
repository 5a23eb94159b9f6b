"""Text-generation and text-embedding clients.

Two interchangeable families: HTTP clients speaking a small JSON wire
protocol, and deterministic mocks for fully offline runs. Selection is
driven by environment variables (``MOCK_MODELS=1`` switches to mocks).

Two embedder roles are configured throughout the pipeline: "base" for
first-pass retrieval and "rerank" for the second-pass bi-encoder; tests
bind them to distinct mocks.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .errors import ConfigError, GenerationError, TransportError

DEFAULT_MAX_INFLIGHT = 4

ENV_GENERATOR_URL = "GENERATOR_URL"
ENV_EMBEDDER_BASE_URL = "EMBEDDER_BASE_URL"
ENV_EMBEDDER_RERANK_URL = "EMBEDDER_RERANK_URL"
ENV_API_KEY = "MODEL_API_KEY"
ENV_MOCK_MODELS = "MOCK_MODELS"


@dataclass(frozen=True)
class GenerationParams:
    """Decoding parameters; temperature defaults to 0 for reproducibility."""

    max_tokens: int = 256
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


class Embedder(Protocol):
    """Maps nonempty text to a unit-norm vector of fixed dimension."""

    embedder_id: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


class Generator(Protocol):
    """Maps a nonempty prompt to a nonempty completion."""

    def generate(self, prompt: str, params: GenerationParams) -> str: ...


def normalize(vec: np.ndarray) -> np.ndarray:
    """Return the unit-norm copy of ``vec``; zero-norm input is a domain error."""
    arr = np.asarray(vec, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero-norm vector")
    return arr / norm


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; inputs are normalized first."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    value = float(np.dot(normalize(a), normalize(b)))
    return max(-1.0, min(1.0, value))


class MockEmbedder:
    """Deterministic offline embedder.

    Each whitespace token is hashed (salted by ``embedder_id``) to a
    coordinate and a sign; token counts accumulate and the vector is then
    normalized. Pure: identical input yields byte-identical output across
    processes.
    """

    def __init__(self, dim: int, embedder_id: str = "mock-base") -> None:
        if dim < 1:
            raise ConfigError("embedding_dim must be >= 1")
        self.dim = dim
        self.embedder_id = embedder_id

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("text must be nonempty")
        vec = np.zeros(self.dim, dtype=np.float64)
        tokens = text.lower().split() or [text]
        for token in tokens:
            index, sign = self._slot(token)
            vec[index] += sign
        if not vec.any():
            # Opposite-sign collisions cancelled everything out; fall back
            # to a single deterministic coordinate so the norm is nonzero.
            index, _ = self._slot(text)
            vec[index] = 1.0
        return normalize(vec)

    def _slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.sha256(f"{self.embedder_id}:{token}".encode("utf-8")).digest()
        index = int.from_bytes(digest[:4], "big") % self.dim
        sign = 1.0 if digest[4] % 2 == 0 else -1.0
        return index, sign


_QUERY_MARKER = "exactly one concise question"
_ANSWER_MARKER = "using only the numbered contexts"
_CONTEXT_RE = re.compile(r"^Context \d+:$", re.MULTILINE)

# Completion the answer prompt instructs the model to emit verbatim when the
# contexts cannot support an answer; detection is a substring check on it.
REFUSAL_MARKER = "An accurate answer cannot be provided."


class MockGenerator:
    """Deterministic offline generator keyed by prompt-template markers.

    Query prompts yield a two-sentence completion (the second sentence
    exercises first-sentence post-processing). Answer prompts yield either
    a context-grounded summary or the refusal marker when the question
    shares no content word with the contexts.
    """

    def generate(self, prompt: str, params: GenerationParams) -> str:
        if not prompt:
            raise ValueError("prompt must be nonempty")
        if _QUERY_MARKER in prompt:
            completion = self._query_completion(prompt)
        elif _ANSWER_MARKER in prompt:
            completion = self._answer_completion(prompt)
        else:
            completion = " ".join(prompt.split()[:12])
        if not completion:
            raise GenerationError("mock generator produced empty completion")
        return completion

    def _query_completion(self, prompt: str) -> str:
        case_text = _section_after(prompt, "Case:")
        snippet = " ".join(case_text.split()[:8])
        return f"How do I resolve {snippet}? Please attach logs if available."

    def _answer_completion(self, prompt: str) -> str:
        question = _section_after(prompt, "Question:").splitlines()[0]
        contexts = _split_contexts(prompt)
        question_words = _content_words(question)
        for ctx in contexts:
            if question_words & _content_words(ctx):
                snippet = " ".join(ctx.split()[:25])
                return f"Based on the provided contexts: {snippet}"
        return REFUSAL_MARKER


def _section_after(prompt: str, anchor: str) -> str:
    index = prompt.find(anchor)
    if index < 0:
        return prompt
    return prompt[index + len(anchor):].strip()


def _split_contexts(prompt: str) -> list[str]:
    headers = list(_CONTEXT_RE.finditer(prompt))
    sections = []
    for i, match in enumerate(headers):
        start = match.end()
        end = headers[i + 1].start() if i + 1 < len(headers) else prompt.find("Question:", start)
        if end < 0:
            end = len(prompt)
        sections.append(prompt[start:end].strip())
    return sections


def _content_words(text: str) -> set[str]:
    return {w for w in re.findall(r"[a-z0-9]+", text.lower()) if len(w) >= 4}


class HttpEmbedder:
    """Embedding over HTTP POST: ``{"input": text}`` -> ``{"vector": [...]}``."""

    def __init__(
        self,
        url: str,
        dim: int,
        embedder_id: str,
        api_key: str | None = None,
        max_inflight: int = DEFAULT_MAX_INFLIGHT,
        timeout: float = 30.0,
    ) -> None:
        import httpx

        self.url = url
        self.dim = dim
        self.embedder_id = embedder_id
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._semaphore = threading.BoundedSemaphore(max_inflight)
        self._client = httpx.Client(timeout=timeout)

    def embed(self, text: str) -> np.ndarray:
        import httpx

        if not text:
            raise ValueError("text must be nonempty")
        with self._semaphore:
            try:
                response = self._client.post(self.url, json={"input": text}, headers=self._headers)
                response.raise_for_status()
            except httpx.HTTPError as exc:
                raise TransportError(f"embedding endpoint {self.url}: {exc}") from exc
        vector = np.asarray(response.json().get("vector", []), dtype=np.float64)
        if vector.shape != (self.dim,):
            raise ConfigError(
                f"embedder {self.embedder_id} returned dimension {vector.shape}, expected ({self.dim},)"
            )
        return normalize(vector)


class HttpGenerator:
    """Generation over HTTP POST: prompt/params in, ``{"text": ...}`` out."""

    def __init__(
        self,
        url: str,
        api_key: str | None = None,
        max_inflight: int = DEFAULT_MAX_INFLIGHT,
        timeout: float = 120.0,
    ) -> None:
        import httpx

        self.url = url
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._semaphore = threading.BoundedSemaphore(max_inflight)
        self._client = httpx.Client(timeout=timeout)

    def generate(self, prompt: str, params: GenerationParams) -> str:
        import httpx

        if not prompt:
            raise ValueError("prompt must be nonempty")
        body = {
            "prompt": prompt,
            "max_tokens": params.max_tokens,
            "temperature": params.temperature,
        }
        with self._semaphore:
            try:
                response = self._client.post(self.url, json=body, headers=self._headers)
                response.raise_for_status()
            except httpx.HTTPError as exc:
                raise TransportError(f"generation endpoint {self.url}: {exc}") from exc
        text = str(response.json().get("text", ""))
        if not text:
            raise GenerationError(f"generation endpoint {self.url} returned empty completion")
        return text


@dataclass(frozen=True)
class ModelClients:
    """The three model bindings used by the pipeline."""

    base_embedder: Embedder
    rerank_embedder: Embedder
    generator: Generator


def mock_clients(embedding_dim: int) -> ModelClients:
    return ModelClients(
        base_embedder=MockEmbedder(embedding_dim, "mock-base"),
        rerank_embedder=MockEmbedder(embedding_dim, "mock-rerank"),
        generator=MockGenerator(),
    )


def clients_from_env(embedding_dim: int, env: dict[str, str] | None = None) -> ModelClients:
    """Build clients from environment variables; mocks when MOCK_MODELS=1."""
    env = dict(os.environ) if env is None else env
    if env.get(ENV_MOCK_MODELS, "") == "1":
        return mock_clients(embedding_dim)
    missing = [
        name
        for name in (ENV_GENERATOR_URL, ENV_EMBEDDER_BASE_URL, ENV_EMBEDDER_RERANK_URL)
        if not env.get(name)
    ]
    if missing:
        raise ConfigError(
            f"missing endpoint variables {missing}; set them or use {ENV_MOCK_MODELS}=1"
        )
    api_key = env.get(ENV_API_KEY) or None
    return ModelClients(
        base_embedder=HttpEmbedder(env[ENV_EMBEDDER_BASE_URL], embedding_dim, "http-base", api_key),
        rerank_embedder=HttpEmbedder(
            env[ENV_EMBEDDER_RERANK_URL], embedding_dim, "http-rerank", api_key
        ),
        generator=HttpGenerator(env[ENV_GENERATOR_URL], api_key),
    )
