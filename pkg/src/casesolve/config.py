"""Pipeline configuration: every tunable constant in one validated record."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import ConfigError

_INT_FIELDS = {
    "per_collection_k",
    "final_k",
    "chunk_size_tokens",
    "chunk_overlap_tokens",
    "n_contexts",
    "embedding_dim",
}
_FLOAT_FIELDS = {"single_turn_threshold", "link_identity_rouge1_threshold"}


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline constants, defaulting to the deployed system's values.

    Defaults: classification threshold 0.1, top-3 per collection and
    overall, 2500-token chunks with 250-token overlap, three answer
    contexts, 0.90 link-identity similarity threshold.
    """

    single_turn_threshold: float = 0.1
    per_collection_k: int = 3
    final_k: int = 3
    chunk_size_tokens: int = 2500
    chunk_overlap_tokens: int = 250
    n_contexts: int = 3
    link_identity_rouge1_threshold: float = 0.90
    embedding_dim: int = 64

    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def validate_config(raw: Mapping[str, Any]) -> PipelineConfig:
    """Build a PipelineConfig from a raw mapping, checking every invariant.

    Unknown keys, non-numeric values, and invariant violations are all
    reported together in a single ConfigError naming each offending field.
    """
    problems: list[str] = []
    values: dict[str, Any] = {}

    known = {f.name for f in fields(PipelineConfig)}
    for key in raw:
        if key not in known:
            problems.append(f"unknown field {key!r}")

    for name in known:
        if name not in raw:
            continue
        value = raw[name]
        try:
            if name in _INT_FIELDS:
                parsed = int(str(value))
            else:
                parsed = float(str(value))
        except (TypeError, ValueError):
            problems.append(f"{name}: not a number: {value!r}")
            continue
        values[name] = parsed

    if problems:
        raise ConfigError("; ".join(problems))

    config = PipelineConfig(**values)
    problems.extend(_invariant_violations(config))
    if problems:
        raise ConfigError("; ".join(problems))
    return config


def _invariant_violations(c: PipelineConfig) -> list[str]:
    out = []
    if not 0.0 < c.single_turn_threshold < 1.0:
        out.append("single_turn_threshold: must be in open interval (0, 1)")
    if c.chunk_overlap_tokens < 0:
        out.append("chunk_overlap_tokens: must be >= 0")
    if c.chunk_overlap_tokens >= c.chunk_size_tokens:
        out.append("chunk_overlap_tokens: overlap must be < size")
    if c.chunk_size_tokens < 1:
        out.append("chunk_size_tokens: must be >= 1")
    if not 0.0 < c.link_identity_rouge1_threshold <= 1.0:
        out.append("link_identity_rouge1_threshold: must be in (0, 1]")
    if c.final_k < 1:
        out.append("final_k: must be >= 1")
    if c.per_collection_k < 1:
        out.append("per_collection_k: must be >= 1")
    if c.n_contexts < 1:
        out.append("n_contexts: must be >= 1")
    if c.embedding_dim < 1:
        out.append("embedding_dim: must be >= 1")
    return out


def load_config_file(path: str | Path) -> PipelineConfig:
    """Parse a flat ``key = value`` UTF-8 config file.

    Blank lines and lines starting with ``#`` are ignored. Keys are exactly
    the PipelineConfig field names.
    """
    raw: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    return validate_config(raw)
