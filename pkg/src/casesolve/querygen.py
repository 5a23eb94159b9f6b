"""Query distillation: one concise retrieval question per case.

The generator is prompted with a versioned template; post-processing keeps
only the first question (or first sentence) of the completion, since models
sometimes keep writing past the instruction.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .clients import GenerationParams, Generator
from .errors import GenerationError
from .models import SupportCase

QUERY_PROMPT_VERSION = "query_v1"
QUERY_PARAMS = GenerationParams(max_tokens=64, temperature=0.0)

_SENTENCE_ENDS = (".", "!")


def _load_prompt(name: str) -> str:
    return resources.files("casesolve.prompts").joinpath(f"{name}.txt").read_text(encoding="utf-8")


_QUERY_TEMPLATE = _load_prompt(QUERY_PROMPT_VERSION)


@dataclass(frozen=True)
class Query:
    """A single-sentence retrieval question distilled from a case."""

    text: str
    source_case_id: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("query text must be nonempty")
        if "\n" in self.text:
            raise ValueError("query text must not contain newlines")


def build_query_prompt(case_text: str) -> str:
    if not case_text:
        raise ValueError("case_text must be nonempty")
    return _QUERY_TEMPLATE.format(case_text=case_text)


def first_question(raw: str) -> str:
    """Truncate a completion to its first question.

    Keeps the prefix up to and including the first ``?``; failing that, up
    to the first ``.`` or ``!`` followed by whitespace or end of text;
    failing that, the whole trimmed text. Idempotent, and always a prefix
    of the trimmed input.
    """
    text = raw.strip()
    if not text:
        raise GenerationError("empty completion")
    mark = text.find("?")
    if mark >= 0:
        return text[: mark + 1]
    for i, ch in enumerate(text):
        if ch in _SENTENCE_ENDS and (i + 1 == len(text) or text[i + 1].isspace()):
            return text[: i + 1]
    return text


def generate_query(case: SupportCase, generator: Generator) -> Query:
    """Distill the cleaned case text into a Query via the generator."""
    if not case.cleaned_text:
        raise ValueError(f"case {case.case_id}: preprocess before generating a query")
    raw = generator.generate(build_query_prompt(case.cleaned_text), QUERY_PARAMS)
    text = " ".join(first_question(raw).split())
    if not text:
        raise GenerationError(f"case {case.case_id}: empty query after post-processing")
    return Query(text=text, source_case_id=case.case_id)
