import json

from sfr_kit import EvalRecord, length_buckets, micro_f1
from sfr_kit.reporting import (
    buckets_table,
    buckets_tsv,
    exact_table,
    exact_tsv,
    metric_table,
    metric_tsv,
    write_exact_report,
    write_metric_report,
    write_stats_report,
)


def sample_report(ner_schema):
    records = [
        EvalRecord("a", '{"person": "Kevin | Therese", "location": "Paris"}', '{"person": "Kevin"}'),
        EvalRecord("b", '{"location": "Oslo"}', '{"location": "Oslo"}'),
    ]
    return micro_f1(records, ner_schema)


def test_metric_table_lines_up(ner_schema):
    table = metric_table([sample_report(ner_schema)])
    lines = table.splitlines()
    assert len(lines) >= 4
    assert lines[0].split() == ["metric", "label", "tp", "fp", "fn", "precision", "recall", "f1"]
    assert set(lines[1]) <= {"-", " "}
    assert "(all)" in lines[2]
    assert "person" in table
    # columns align: every data row puts its label at the same offset
    offset = lines[0].index("label")
    assert lines[2][offset:].startswith("(all)")


def test_metric_tsv_is_machine_readable(ner_schema):
    tsv = metric_tsv([sample_report(ner_schema)])
    lines = tsv.strip().splitlines()
    assert lines[0] == "metric\tlabel\ttp\tfp\tfn\tprecision\trecall\tf1"
    assert all(len(line.split("\t")) == 8 for line in lines)


def test_buckets_renderers():
    stats = length_buckets(["a " * n for n in (10, 20, 30, 40, 100)])
    table = buckets_table(stats)
    assert "P50" in table and "P99" in table
    tsv = buckets_tsv(stats)
    rows = tsv.strip().splitlines()
    assert rows[0].startswith("percentile\t")
    assert len(rows) == 4


def test_exact_renderers():
    accuracy = {"person": 1.0, "location": 0.5}
    assert "person" in exact_table(accuracy)
    tsv = exact_tsv(accuracy)
    assert tsv.splitlines()[0] == "slot\taccuracy"
    assert "location\t0.5" in tsv


def test_write_metric_report(tmp_path, ner_schema):
    paths = write_metric_report([sample_report(ner_schema)], tmp_path)
    names = {path.name for path in paths}
    assert "report.json" in names
    assert "report.tsv" in names
    assert any(name.endswith(".png") for name in names)
    for path in paths:
        assert path.exists()
        assert path.stat().st_size > 0
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["micro_f1"]["metric"] == "micro_f1"
    png = next(path for path in paths if path.suffix == ".png")
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_write_exact_report(tmp_path):
    paths = write_exact_report({"person": 0.75}, tmp_path)
    assert {path.suffix for path in paths} == {".json", ".tsv", ".png"}
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload == {"exact_accuracy": {"person": 0.75}}


def test_write_stats_report(tmp_path):
    stats = length_buckets(["a " * n for n in (3, 5, 8)])
    paths = write_stats_report(stats, tmp_path)
    assert {path.suffix for path in paths} == {".json", ".tsv", ".png"}
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["total"] == 3
    assert [bucket["percentile"] for bucket in payload["buckets"]] == [50, 70, 99]


def test_report_dir_created_if_missing(tmp_path):
    target = tmp_path / "nested" / "dir"
    paths = write_exact_report({"person": 1.0}, target)
    assert all(path.exists() for path in paths)
