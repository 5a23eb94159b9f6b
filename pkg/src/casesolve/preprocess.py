"""Case-text cleaning and product-name alias expansion.

Cleaning keeps printable ASCII only: control and escape characters are
dropped, ASCII whitespace collapses to single spaces, and non-ASCII
characters are removed outright.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .models import SupportCase

_WHITESPACE = {"\t", "\n", "\r", "\x0b", "\x0c", " "}


def clean_text(raw: str) -> str:
    """Strip a string down to single-spaced printable ASCII.

    Idempotent: cleaning cleaned text is a no-op.
    """
    out: list[str] = []
    for ch in raw:
        code = ord(ch)
        if code > 126:
            continue
        if ch in _WHITESPACE:
            if out and out[-1] != " ":
                out.append(" ")
            continue
        if code < 32:
            continue
        out.append(ch)
    return "".join(out).strip()


def concat_case(subject: str, description: str) -> str:
    """Join cleaned subject and description with a single newline.

    The newline keeps the field boundary visible to downstream prompts;
    an empty description yields the subject alone.
    """
    if not subject:
        raise ValueError("subject must be nonempty")
    if not description:
        return subject
    return f"{subject}\n{description}"


def preprocess_case(case: SupportCase) -> SupportCase:
    """Return ``case`` with ``cleaned_text`` derived from subject+description."""
    subject = clean_text(case.subject)
    description = clean_text(case.description)
    if not subject:
        raise ValueError(f"case {case.case_id}: subject empty after cleaning")
    return case.with_cleaned_text(concat_case(subject, description))


def _normalize_name(name: str) -> str:
    return " ".join(name.split()).lower()


@dataclass(frozen=True)
class ProductAliasTable:
    """Known product acronyms and alternative names, keyed case-insensitively."""

    entries: Mapping[str, tuple[str, ...]]

    def __post_init__(self) -> None:
        seen: dict[str, str] = {}
        for name, aliases in self.entries.items():
            if not aliases:
                raise ValueError(f"alias list for {name!r} must be nonempty")
            key = _normalize_name(name)
            if key in seen:
                raise ValueError(f"duplicate product name after normalization: {name!r} vs {seen[key]!r}")
            seen[key] = name

    @classmethod
    def from_file(cls, path: str | Path) -> "ProductAliasTable":
        """Load a JSON map of product name -> list of aliases."""
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ValueError(f"{path}: alias table must be a JSON object")
        return cls({str(k): tuple(str(a) for a in v) for k, v in raw.items()})

    @classmethod
    def empty(cls) -> "ProductAliasTable":
        return cls({})


def expand_product(product_name: str, table: ProductAliasTable) -> list[str]:
    """Expand a product name into [name, *aliases]; unmatched names pass through.

    Matching is case-insensitive on whitespace-normalized names. The input
    name always sits at position 0, spelled as given.
    """
    wanted = _normalize_name(product_name)
    for name, aliases in table.entries.items():
        if _normalize_name(name) == wanted:
            return [product_name, *aliases]
    return [product_name]
