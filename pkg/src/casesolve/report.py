"""Evaluation report artifacts: figures and delimited metric files."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport


def write_metrics_csv(report: EvalReport, path: str | Path) -> None:
    """Flat ``metric,value`` rows covering every aggregate in the report."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["metric", "value"])
        for name, value in sorted(report.classifier.items()):
            writer.writerow([f"classifier_{name}", f"{value:.6f}"])
        for n in sorted(report.recall_at):
            writer.writerow([f"recall_at_{n}", f"{report.recall_at[n]:.6f}"])
        if report.rougeL_mean is not None:
            writer.writerow(["rougeL_mean", f"{report.rougeL_mean:.6f}"])
        if report.rubric_mean is not None:
            writer.writerow(["rubric_mean", f"{report.rubric_mean:.2f}"])
        for name, value in sorted(report.counts.items()):
            writer.writerow([f"count_{name}", value])


def render_recall_curve(report: EvalReport, path: str | Path) -> None:
    """Plot recall against the number of returned links (log-scaled x)."""
    ns = sorted(report.recall_at)
    values = [report.recall_at[n] for n in ns]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(ns, values, marker="o", color="#d4a017")
    ax.set_xscale("log")
    ax.set_xticks(ns)
    ax.get_xaxis().set_major_formatter(matplotlib.ticker.ScalarFormatter())
    ax.set_xlabel("top n links")
    ax.set_ylabel("recall")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.set_title("Retrieval recall under link identity")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_report_files(report: EvalReport, report_path: str | Path) -> list[Path]:
    """Write the JSON report plus CSV metrics and the recall figure.

    Companion files share the report's stem: ``<stem>.csv`` and
    ``<stem>_recall.png`` next to the report.
    """
    report_path = Path(report_path)
    report_path.write_text(report.to_json(), encoding="utf-8")
    csv_path = report_path.with_suffix(".csv")
    write_metrics_csv(report, csv_path)
    figure_path = report_path.with_name(report_path.stem + "_recall.png")
    render_recall_curve(report, figure_path)
    return [report_path, csv_path, figure_path]
