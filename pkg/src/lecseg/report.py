"""Evaluation report rendering: plain-text table, CSV, JSON and figures."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .corpus import GroundTruth
from .evaluation import EvalReport
from .segments import AnnotatedSegment

_PNG_METADATA = {"Software": "lecseg"}


def format_table(report: EvalReport, label: str = "segmentation") -> str:
    """Fixed-width summary table followed by the per-topic overlap column."""
    lines = [
        f"{'Metric':<24}{label:>14}",
        "-" * 38,
        f"{'Mean OTR':<24}{report.mean_otr:>14.4f}",
        f"{'Pk':<24}{report.pk:>14.4f}",
        f"{'WindowDiff':<24}{report.window_diff:>14.4f}",
        f"{'Boundary precision':<24}{report.precision:>14.4f}",
        f"{'Boundary recall':<24}{report.recall:>14.4f}",
        f"{'Boundary F1':<24}{report.f1:>14.4f}",
    ]
    if report.per_topic:
        lines.append("")
        lines.append(f"{'Topic':<40}{'OTR':>8}")
        lines.append("-" * 48)
        for name, score in report.per_topic:
            lines.append(f"{name[:40]:<40}{score:>8.4f}")
    return "\n".join(lines) + "\n"


def write_report_json(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def write_report_csv(report: EvalReport, path: str | Path) -> None:
    """One summary row plus one row per topic, for downstream plotting."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["record", "topic", "value"])
        writer.writerow(["mean_otr", "", f"{report.mean_otr:.6f}"])
        writer.writerow(["pk", "", f"{report.pk:.6f}"])
        writer.writerow(["window_diff", "", f"{report.window_diff:.6f}"])
        writer.writerow(["precision", "", f"{report.precision:.6f}"])
        writer.writerow(["recall", "", f"{report.recall:.6f}"])
        writer.writerow(["f1", "", f"{report.f1:.6f}"])
        for name, score in report.per_topic:
            writer.writerow(["topic_otr", name, f"{score:.6f}"])


def _draw_intervals(ax, intervals, y: float, color: str, label: str) -> None:
    bars = [(s, e - s) for s, e in intervals]
    ax.broken_barh(bars, (y, 0.6), facecolors=color, edgecolor="black", linewidth=0.5)
    ax.text(-0.01, y + 0.3, label, transform=ax.get_yaxis_transform(), ha="right", va="center")


def render_figures(
    gt: GroundTruth | None,
    segments: list[AnnotatedSegment],
    report: EvalReport | None,
    out_dir: str | Path,
) -> list[Path]:
    """Write the timeline comparison and per-topic overlap figures as PNGs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    fig, ax = plt.subplots(figsize=(10, 2.4))
    sys_intervals = [(s.start, s.end) for s in segments]
    _draw_intervals(ax, sys_intervals, 1.0, "tab:blue", "system")
    if gt is not None:
        _draw_intervals(ax, [(t.start, t.end) for t in gt.topics], 0.0, "tab:orange", "truth")
    ax.set_ylim(-0.4, 2.0)
    ax.set_yticks([])
    ax.set_xlabel("seconds")
    ax.set_title("Topic segmentation timeline")
    fig.tight_layout()
    timeline_path = out_dir / "timeline.png"
    fig.savefig(timeline_path, metadata=_PNG_METADATA)
    plt.close(fig)
    written.append(timeline_path)

    if report is not None and report.per_topic:
        fig, ax = plt.subplots(figsize=(8, 3.2))
        names = [name for name, _ in report.per_topic]
        scores = [score for _, score in report.per_topic]
        ax.bar(range(len(names)), scores, color="tab:blue")
        ax.set_xticks(range(len(names)))
        ax.set_xticklabels(names, rotation=30, ha="right", fontsize=7)
        ax.set_ylim(0.0, 1.05)
        ax.set_ylabel("OTR")
        ax.set_title("Per-topic overlap with ground truth")
        fig.tight_layout()
        otr_path = out_dir / "per_topic_otr.png"
        fig.savefig(otr_path, metadata=_PNG_METADATA)
        plt.close(fig)
        written.append(otr_path)
    return written
