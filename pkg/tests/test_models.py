import pytest

from casesolve.models import Recommendation, RecommendationResult, SupportCase


def _result(url: str, score: float) -> RecommendationResult:
    return RecommendationResult(
        url=url, title="t", answer_text="a", insufficient_context=False, rerank_score=score
    )


def test_case_requires_id_and_subject():
    with pytest.raises(ValueError, match="case_id"):
        SupportCase(case_id="", subject="s")
    with pytest.raises(ValueError, match="subject"):
        SupportCase(case_id="c", subject="")


def test_cleaned_text_rejects_control_characters():
    with pytest.raises(ValueError, match="cleaned_text"):
        SupportCase(case_id="c", subject="s", cleaned_text="ab\x1bc")


def test_cleaned_text_allows_field_separator_newline():
    case = SupportCase(case_id="c", subject="s", cleaned_text="subject\ndescription")
    assert case.cleaned_text == "subject\ndescription"


def test_case_roundtrip():
    case = SupportCase(
        case_id="c-9",
        subject="Login fails",
        description="after upgrade",
        product_name="Alpha",
        product_version="2.1",
        cleaned_text="Login fails\nafter upgrade",
    )
    assert SupportCase.from_dict(case.to_dict()) == case


def test_recommendation_roundtrip():
    rec = Recommendation(
        case_id="c-9",
        query_text="How do I fix login?",
        results=(_result("https://a", 0.9), _result("https://b", 0.4)),
        status="ok",
    )
    assert Recommendation.from_dict(rec.to_dict()) == rec


def test_recommendation_requires_descending_scores():
    with pytest.raises(ValueError, match="descending"):
        Recommendation(
            case_id="c",
            query_text="q",
            results=(_result("https://a", 0.1), _result("https://b", 0.9)),
        )
