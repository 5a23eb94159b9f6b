import json

import pytest
from click.testing import CliRunner

from casesolve.classifier import LinearTurnModel
from casesolve.cli import main

from conftest import write_fixture_corpus, write_fixture_dataset, write_fixture_training


@pytest.fixture()
def workspace(tmp_path, monkeypatch):
    monkeypatch.setenv("MOCK_MODELS", "1")
    corpus = write_fixture_corpus(tmp_path / "corpus.jsonl")
    dataset = write_fixture_dataset(tmp_path / "dataset.jsonl")
    training = write_fixture_training(tmp_path / "training.jsonl")
    return tmp_path, corpus, dataset, training


def _run(args):
    runner = CliRunner()
    return runner.invoke(main, args, catch_exceptions=False)


def _ingest(tmp_path, corpus):
    index = tmp_path / "index.jsonl"
    result = _run(["ingest", "--corpus", str(corpus), "--out", str(index)])
    assert result.exit_code == 0, result.output
    return index


def test_ingest_reports_counts(workspace):
    tmp_path, corpus, _, _ = workspace
    index = tmp_path / "index.jsonl"
    result = _run(["ingest", "--corpus", str(corpus), "--out", str(index)])
    assert result.exit_code == 0
    assert "50 documents" in result.output and "3 collections" in result.output
    assert index.exists()


def test_train_classifier_writes_model(workspace):
    tmp_path, _, _, training = workspace
    model_path = tmp_path / "turn-model.json"
    result = _run(["train-classifier", "--data", str(training), "--out", str(model_path)])
    assert result.exit_code == 0, result.output
    model = LinearTurnModel.load(model_path)
    assert model.embedder_id == "mock-base"


def test_resolve_prints_recommendation(workspace):
    tmp_path, corpus, _, _ = workspace
    index = _ingest(tmp_path, corpus)
    case_path = tmp_path / "case.json"
    case_path.write_text(
        json.dumps(
            {
                "case_id": "cli-1",
                "subject": "Login failure reported",
                "description": "login failure authentication password credential cache",
                "product_name": "Alpha Server",
            }
        ),
        encoding="utf-8",
    )
    result = _run(["resolve", "--case", str(case_path), "--index", str(index)])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["status"] == "ok"
    assert 1 <= len(payload["results"]) <= 3


def test_resolve_exits_2_when_gated(workspace):
    tmp_path, corpus, _, training = workspace
    index = _ingest(tmp_path, corpus)
    model_path = tmp_path / "turn-model.json"
    _run(["train-classifier", "--data", str(training), "--out", str(model_path)])
    case_path = tmp_path / "case.json"
    case_path.write_text(
        json.dumps(
            {
                "case_id": "cli-2",
                "subject": "Something seems off",
                "description": "It behaves strangely sometimes, cannot reproduce yet",
            }
        ),
        encoding="utf-8",
    )
    result = _run(
        ["resolve", "--case", str(case_path), "--index", str(index), "--classifier", str(model_path)]
    )
    assert result.exit_code == 2, result.output
    payload = json.loads(result.output)
    assert payload["status"] == "not_single_turn"


def test_evaluate_writes_report_csv_figure_and_trace(workspace):
    tmp_path, corpus, dataset, training = workspace
    index = _ingest(tmp_path, corpus)
    model_path = tmp_path / "turn-model.json"
    _run(["train-classifier", "--data", str(training), "--out", str(model_path)])

    report_path = tmp_path / "report.json"
    result = _run(
        [
            "evaluate",
            "--dataset", str(dataset),
            "--index", str(index),
            "--n", "1,3,5,10",
            "--report", str(report_path),
            "--classifier", str(model_path),
        ]
    )
    assert result.exit_code == 0, result.output
    assert report_path.exists()
    assert (tmp_path / "report.csv").exists()
    assert (tmp_path / "report_recall.png").exists()
    assert (tmp_path / "report.trace.jsonl").exists()

    report = json.loads(report_path.read_text())
    assert set(report["recall_at"]) == {"1", "3", "5", "10"}
    assert "recall@3" in result.output

    csv_lines = (tmp_path / "report.csv").read_text().splitlines()
    assert csv_lines[0] == "metric,value"
    assert any(line.startswith("recall_at_3,") for line in csv_lines)


def test_evaluate_is_deterministic_across_runs(workspace):
    tmp_path, corpus, dataset, training = workspace
    index = _ingest(tmp_path, corpus)
    model_path = tmp_path / "turn-model.json"
    _run(["train-classifier", "--data", str(training), "--out", str(model_path)])

    outputs = []
    for name in ("a", "b"):
        report_path = tmp_path / f"report_{name}.json"
        result = _run(
            [
                "evaluate",
                "--dataset", str(dataset),
                "--index", str(index),
                "--n", "1,3",
                "--report", str(report_path),
                "--classifier", str(model_path),
            ]
        )
        assert result.exit_code == 0
        outputs.append(
            report_path.read_bytes()
            + (tmp_path / f"report_{name}.trace.jsonl").read_bytes()
        )
    assert outputs[0] == outputs[1]
