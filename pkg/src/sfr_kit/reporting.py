"""Report rendering: aligned tables, TSV, and saved matplotlib charts.

The chart helpers import matplotlib lazily and force the Agg backend, so
report generation works headless and nothing pays the import cost unless a
figure is actually requested.
"""

from __future__ import annotations

import json
from pathlib import Path

from .evaluation import LengthBuckets, MetricReport


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(str(cell)) for cell in column) for column in zip(header, *rows)] if rows else [
        len(h) for h in header
    ]
    lines = [
        "  ".join(str(cell).ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in [header, ["-" * w for w in widths], *rows]
    ]
    return "\n".join(lines)


def _fmt(value: float) -> str:
    return f"{value:.4f}"


def metric_rows(report: MetricReport) -> list[list[str]]:
    rows = [[report.metric, "(all)", str(report.tp), str(report.fp), str(report.fn),
             _fmt(report.precision), _fmt(report.recall), _fmt(report.f1)]]
    for label, (tp, fp, fn) in report.per_label.items():
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
        rows.append([report.metric, label, str(tp), str(fp), str(fn), _fmt(precision), _fmt(recall), _fmt(f1)])
    return rows


_METRIC_HEADER = ["metric", "label", "tp", "fp", "fn", "precision", "recall", "f1"]


def metric_table(reports: list[MetricReport]) -> str:
    rows = [row for report in reports for row in metric_rows(report)]
    return _table(_METRIC_HEADER, rows)


def metric_tsv(reports: list[MetricReport]) -> str:
    lines = ["\t".join(_METRIC_HEADER)]
    for report in reports:
        lines.extend("\t".join(row) for row in metric_rows(report))
    return "\n".join(lines) + "\n"


_BUCKET_HEADER = ["percentile", "threshold", "count", "min_tokens", "mean_tokens", "max_tokens"]


def bucket_rows(buckets: LengthBuckets) -> list[list[str]]:
    return [
        [f"P{b.percentile}", str(b.threshold), str(b.count), str(b.min_tokens), _fmt(b.mean_tokens), str(b.max_tokens)]
        for b in buckets.buckets
    ]


def buckets_table(buckets: LengthBuckets) -> str:
    return _table(_BUCKET_HEADER, bucket_rows(buckets))


def buckets_tsv(buckets: LengthBuckets) -> str:
    lines = ["\t".join(_BUCKET_HEADER)]
    lines.extend("\t".join(row) for row in bucket_rows(buckets))
    return "\n".join(lines) + "\n"


_EXACT_HEADER = ["slot", "accuracy"]


def exact_table(accuracy: dict[str, float]) -> str:
    return _table(_EXACT_HEADER, [[slot, _fmt(value)] for slot, value in accuracy.items()])


def exact_tsv(accuracy: dict[str, float]) -> str:
    lines = ["\t".join(_EXACT_HEADER)]
    lines.extend(f"{slot}\t{value:.6f}" for slot, value in accuracy.items())
    return "\n".join(lines) + "\n"


def _axes(title: str, xlabel: str, ylabel: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(axis="y", alpha=0.3)
    return fig, ax


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    import matplotlib.pyplot as plt

    plt.close(fig)


def metric_figure(report: MetricReport, path: str | Path) -> Path:
    """Bar chart of per-label F1 with the micro-average drawn as a line."""
    path = Path(path)
    labels, scores = [], []
    for label, (tp, fp, fn) in report.per_label.items():
        labels.append(label)
        scores.append(2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0)
    fig, ax = _axes(f"{report.metric} by label", "label", "F1")
    ax.bar(range(len(labels)), scores, color="#4878b0")
    ax.axhline(report.f1, color="#c44e52", linestyle="--", label=f"micro {report.f1:.3f}")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.legend()
    _save(fig, path)
    return path


def buckets_figure(buckets: LengthBuckets, path: str | Path) -> Path:
    """Mean token count per percentile bucket."""
    path = Path(path)
    names = [f"P{b.percentile}" for b in buckets.buckets]
    means = [b.mean_tokens for b in buckets.buckets]
    spans = [b.max_tokens for b in buckets.buckets]
    fig, ax = _axes(f"token lengths ({buckets.tokenizer_id})", "percentile bucket", "tokens")
    ax.bar(names, means, color="#4878b0", label="bucket mean")
    ax.plot(names, spans, "o--", color="#c44e52", label="bucket max")
    ax.legend()
    _save(fig, path)
    return path


def exact_figure(accuracy: dict[str, float], path: str | Path) -> Path:
    """Per-slot exact-match accuracy bars."""
    path = Path(path)
    slots = list(accuracy)
    fig, ax = _axes("exact-match accuracy by slot", "slot", "accuracy")
    ax.bar(range(len(slots)), [accuracy[s] for s in slots], color="#4878b0")
    ax.set_xticks(range(len(slots)))
    ax.set_xticklabels(slots, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    _save(fig, path)
    return path


def write_metric_report(reports: list[MetricReport], out_dir: str | Path) -> list[Path]:
    """Write report.json, report.tsv, and one F1 chart per metric."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    payload = {report.metric: report.to_dict() for report in reports}
    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    written.append(json_path)
    tsv_path = out_dir / "report.tsv"
    tsv_path.write_text(metric_tsv(reports), encoding="utf-8")
    written.append(tsv_path)
    for report in reports:
        written.append(metric_figure(report, out_dir / f"{report.metric}_by_label.png"))
    return written


def write_exact_report(accuracy: dict[str, float], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    json_path.write_text(
        json.dumps({"exact_accuracy": accuracy}, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    tsv_path = out_dir / "report.tsv"
    tsv_path.write_text(exact_tsv(accuracy), encoding="utf-8")
    figure = exact_figure(accuracy, out_dir / "exact_accuracy.png")
    return [json_path, tsv_path, figure]


def write_stats_report(buckets: LengthBuckets, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(buckets.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    tsv_path = out_dir / "report.tsv"
    tsv_path.write_text(buckets_tsv(buckets), encoding="utf-8")
    figure = buckets_figure(buckets, out_dir / "length_buckets.png")
    return [json_path, tsv_path, figure]
