"""Command-line interface: ingest, serve, resolve, evaluate, train-classifier."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .classifier import TrainingParams, load_training_file, train_linear_head
from .clients import clients_from_env
from .config import PipelineConfig, load_config_file
from .errors import PipelineError
from .evaluation import evaluate_pipeline, load_dataset
from .feedback import FeedbackStore
from .models import STATUS_NOT_SINGLE_TURN, SupportCase
from .pipeline import recommend
from .report import render_report_files
from .retrieval import ingest_corpus, save_index
from .service import build_pipeline, create_app


def _load_config(path: str | None) -> PipelineConfig:
    return load_config_file(path) if path else PipelineConfig()


@click.group()
def main() -> None:
    """Support-case solution recommendation."""


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True), help="JSONL corpus file.")
@click.option("--out", required=True, type=click.Path(), help="Index output path.")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def ingest(corpus: str, out: str, config_path: str | None) -> None:
    """Embed a corpus and persist it as a searchable index."""
    config = _load_config(config_path)
    clients = clients_from_env(config.embedding_dim)
    collections = ingest_corpus(corpus, clients.base_embedder)
    save_index(collections, out)
    total = sum(len(c) for c in collections)
    click.echo(f"ingested {total} documents into {len(collections)} collections -> {out}")


@main.command()
@click.option("--case", "case_path", required=True, type=click.Path(exists=True), help="JSON case file.")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--classifier", "classifier_path", type=click.Path(exists=True), default=None)
@click.option("--aliases", "aliases_path", type=click.Path(exists=True), default=None)
def resolve(
    case_path: str,
    index_path: str,
    config_path: str | None,
    classifier_path: str | None,
    aliases_path: str | None,
) -> None:
    """Run the pipeline on one case and print the recommendation as JSON.

    Exit codes: 0 on success, 2 when the case is gated as not single-turn,
    1 on failure (with the failing stage named on stderr).
    """
    pipeline = build_pipeline(
        index_path,
        config=_load_config(config_path),
        classifier_path=classifier_path,
        aliases_path=aliases_path,
    )
    case = SupportCase.from_dict(json.loads(Path(case_path).read_text(encoding="utf-8")))
    try:
        rec = recommend(case, pipeline)
    except PipelineError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    click.echo(json.dumps(rec.to_dict(), sort_keys=True))
    if rec.status == STATUS_NOT_SINGLE_TURN:
        sys.exit(2)


@main.command()
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--n", "n_spec", default="1,3,5,10", show_default=True, help="Comma-separated recall depths.")
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--classifier", "classifier_path", type=click.Path(exists=True), default=None)
@click.option("--aliases", "aliases_path", type=click.Path(exists=True), default=None)
def evaluate(
    dataset_path: str,
    index_path: str,
    n_spec: str,
    report_path: str,
    config_path: str | None,
    classifier_path: str | None,
    aliases_path: str | None,
) -> None:
    """Evaluate the pipeline over an annotated dataset and write report files."""
    pipeline = build_pipeline(
        index_path,
        config=_load_config(config_path),
        classifier_path=classifier_path,
        aliases_path=aliases_path,
    )
    dataset = load_dataset(dataset_path, pipeline.collections)
    n_values = [int(part) for part in n_spec.split(",") if part.strip()]
    trace_path = Path(report_path).with_suffix(".trace.jsonl")
    report = evaluate_pipeline(dataset, pipeline, n_values, trace_path=trace_path)
    written = render_report_files(report, report_path)
    for path in [*written, trace_path]:
        click.echo(f"wrote {path}")
    for n in sorted(report.recall_at):
        click.echo(f"recall@{n} = {report.recall_at[n]:.3f}")
    click.echo(
        "classifier P={precision:.3f} R={recall:.3f} F1={f1:.3f}".format(**report.classifier)
    )


@main.command("train-classifier")
@click.option("--data", "data_path", required=True, type=click.Path(exists=True), help="JSONL {text, label} rows.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--epochs", default=800, show_default=True)
@click.option("--learning-rate", default=2.0, show_default=True)
@click.option("--l2", default=1e-4, show_default=True)
def train_classifier(
    data_path: str,
    out_path: str,
    config_path: str | None,
    epochs: int,
    learning_rate: float,
    l2: float,
) -> None:
    """Train the single-turn classifier head and persist it as JSON."""
    config = _load_config(config_path)
    clients = clients_from_env(config.embedding_dim)
    data = load_training_file(data_path)
    model = train_linear_head(
        data, clients.base_embedder, TrainingParams(epochs=epochs, learning_rate=learning_rate, l2=l2)
    )
    model.save(out_path)
    click.echo(f"trained on {len(data)} rows -> {out_path}")


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--feedback", "feedback_path", default="feedback.jsonl", show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--classifier", "classifier_path", type=click.Path(exists=True), default=None)
@click.option("--aliases", "aliases_path", type=click.Path(exists=True), default=None)
@click.option("--silent", is_flag=True, default=False, help="Run the pipeline but return 204 bodies.")
@click.option("--ui-dir", "ui_dir", type=click.Path(exists=True), default=None, help="Static assets to mount at /ui.")
def serve(
    port: int,
    host: str,
    index_path: str,
    feedback_path: str,
    config_path: str | None,
    classifier_path: str | None,
    aliases_path: str | None,
    silent: bool,
    ui_dir: str | None,
) -> None:
    """Serve the recommendation API."""
    import uvicorn

    pipeline = build_pipeline(
        index_path,
        config=_load_config(config_path),
        classifier_path=classifier_path,
        aliases_path=aliases_path,
    )
    app = create_app(pipeline, FeedbackStore(feedback_path), silent_mode=silent, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
