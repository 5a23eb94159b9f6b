"""Shared fixtures: deterministic corpus, dataset, and pipeline builders."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from casesolve.classifier import LabeledCase, train_linear_head
from casesolve.clients import ModelClients, mock_clients
from casesolve.config import PipelineConfig
from casesolve.models import MULTI_TURN, SINGLE_TURN
from casesolve.pipeline import Pipeline
from casesolve.retrieval import Collection, ingest_corpus

# 16 topics x 3 collections = 48 documents; two planted duplicates of the
# login topic bring the fixture corpus to exactly 50.
TOPICS = {
    "login-failure": "login failure authentication password credential cache",
    "certificate-renewal": "certificate renewal keystore expiry secure listener",
    "database-migration": "database migration schema rollback snapshot integrity",
    "disk-space": "disk space storage cleanup archive rotation",
    "network-timeout": "network timeout connection latency firewall port",
    "memory-leak": "memory leak heap usage garbage collection",
    "license-activation": "license activation entitlement registration renewal key",
    "backup-restore": "backup restore snapshot recovery archive verification",
    "cluster-failover": "cluster failover node quorum replica election",
    "api-rate-limit": "api rate limit throttle quota burst",
    "email-notification": "email notification smtp relay delivery bounce",
    "ldap-sync": "ldap sync directory group membership attribute",
    "report-export": "report export csv pdf rendering layout",
    "search-index": "search index rebuild crawler stale ranking",
    "mobile-session": "mobile session token refresh expiry device",
    "patch-install": "patch install hotfix dependency conflict version",
}

_COLLECTION_PATTERNS = {
    "product-docs": "The {title} guide covers {kw}. Follow the procedure to resolve {kw} issues. Steps include checking {kw} settings and validating the final state.",
    "knowledge-base": "Issue summary about {kw}. Root cause identified in {kw} handling. Resolution requires {kw} maintenance plus verification of the environment afterwards.",
    "forum-archive": "Question thread regarding {kw}. Community answer recommends {kw} inspection followed by {kw} cleanup and a full service restart to finish.",
}


def topic_title(topic: str) -> str:
    return topic.replace("-", " ").title()


def doc_url(collection: str, topic: str) -> str:
    return f"https://{collection}.example.com/{topic}"


def fixture_corpus_rows() -> list[dict]:
    rows = []
    for collection, pattern in _COLLECTION_PATTERNS.items():
        for topic, keywords in TOPICS.items():
            rows.append(
                {
                    "doc_id": f"{collection}-{topic}",
                    "url": doc_url(collection, topic),
                    "title": topic_title(topic),
                    "text": pattern.format(title=topic_title(topic), kw=keywords),
                    "collection": collection,
                }
            )
    login_docs = _COLLECTION_PATTERNS["product-docs"].format(
        title=topic_title("login-failure"), kw=TOPICS["login-failure"]
    )
    # Same page under a differently-spelled URL (trailing slash + fragment).
    rows.append(
        {
            "doc_id": "knowledge-base-login-mirror",
            "url": doc_url("product-docs", "login-failure") + "/#steps",
            "title": topic_title("login-failure"),
            "text": login_docs,
            "collection": "knowledge-base",
        }
    )
    # Different URL whose canonical link points at the product-docs page.
    rows.append(
        {
            "doc_id": "forum-archive-login-alias",
            "url": "https://forum-archive.example.com/threads/9911",
            "canonical_url": doc_url("product-docs", "login-failure"),
            "title": "Login Failure Thread",
            "text": login_docs,
            "collection": "forum-archive",
        }
    )
    assert len(rows) == 50
    return rows


def write_fixture_corpus(path: Path) -> Path:
    path.write_text(
        "\n".join(json.dumps(row, sort_keys=True) for row in fixture_corpus_rows()) + "\n",
        encoding="utf-8",
    )
    return path


# ---------------------------------------------------------------------------
# Evaluation dataset: 15 single-turn cases drawn from corpus topics plus 10
# vague multi-turn cases with a disjoint vocabulary.

_MULTI_TURN_TEXTS = [
    "Something seems off, not sure where, will look tomorrow",
    "It behaves strangely sometimes, cannot reproduce yet",
    "Customer reports intermittent weirdness, no details yet",
    "Odd behavior appears occasionally, environment unknown",
    "Unexpected things happen randomly, nothing specific observed",
    "Works on one machine, not another, unclear why",
    "Vague slowness reported, no numbers attached yet",
    "Occasional glitch, screenshots pending from the customer",
    "Something broke overnight, no error messages captured",
    "Hard to say, the symptoms keep shifting daily",
]


def fixture_dataset_rows() -> list[dict]:
    rows = []
    single_topics = list(TOPICS)[:15]
    for i, topic in enumerate(single_topics, start=1):
        keywords = TOPICS[topic]
        rows.append(
            {
                "case": {
                    "case_id": f"case-s{i:02d}",
                    "subject": f"{topic_title(topic)} reported",
                    "description": f"We see {keywords} problems after the weekend change window",
                    "product_name": "Alpha Server",
                    "product_version": "4.2",
                },
                "gt_single_turn": SINGLE_TURN,
                "gt_query": f"How do I fix {keywords} problems?",
                "gt_links": [doc_url("product-docs", topic)],
                "gt_answer": _COLLECTION_PATTERNS["product-docs"].format(
                    title=topic_title(topic), kw=keywords
                ),
            }
        )
    for i, text in enumerate(_MULTI_TURN_TEXTS, start=1):
        rows.append(
            {
                "case": {
                    "case_id": f"case-m{i:02d}",
                    "subject": text.split(",")[0],
                    "description": text,
                    "product_name": "Alpha Server",
                    "product_version": "4.2",
                },
                "gt_single_turn": MULTI_TURN,
            }
        )
    assert len(rows) == 25
    return rows


def write_fixture_dataset(path: Path) -> Path:
    path.write_text(
        "\n".join(json.dumps(row, sort_keys=True) for row in fixture_dataset_rows()) + "\n",
        encoding="utf-8",
    )
    return path


def fixture_training_rows() -> list[LabeledCase]:
    """Linearly separable labeled texts matching the dataset vocabularies."""
    rows = []
    for raw in fixture_dataset_rows():
        case = raw["case"]
        text = f"{case['subject']}\n{case['description']}"
        rows.append(LabeledCase(text=text, label=raw["gt_single_turn"]))
        rows.append(LabeledCase(text=case["subject"], label=raw["gt_single_turn"]))
    return rows


def write_fixture_training(path: Path) -> Path:
    path.write_text(
        "\n".join(
            json.dumps({"text": row.text, "label": row.label}) for row in fixture_training_rows()
        )
        + "\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture(scope="session")
def config() -> PipelineConfig:
    return PipelineConfig()


@pytest.fixture(scope="session")
def clients(config) -> ModelClients:
    return mock_clients(config.embedding_dim)


@pytest.fixture(scope="session")
def fixture_corpus_path(tmp_path_factory) -> Path:
    return write_fixture_corpus(tmp_path_factory.mktemp("corpus") / "corpus.jsonl")


@pytest.fixture(scope="session")
def collections(fixture_corpus_path, clients) -> list[Collection]:
    return ingest_corpus(fixture_corpus_path, clients.base_embedder)


@pytest.fixture(scope="session")
def trained_turn_model(clients):
    return train_linear_head(fixture_training_rows(), clients.base_embedder)


@pytest.fixture(scope="session")
def pipeline(clients, collections, config, trained_turn_model) -> Pipeline:
    return Pipeline(
        clients=clients,
        collections=collections,
        config=config,
        turn_model=trained_turn_model,
    )
