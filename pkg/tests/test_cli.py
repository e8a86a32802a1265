import io
import json
import subprocess
import sys

import pytest

from conftest import RE_OUTPUT_CONCISE, RE_OUTPUT_PRETTY, RULES_OUTPUT_CONCISE, RULES_OUTPUT_FULL, canonical
from sfr_kit.cli import main

NER_SCHEMA_DICT = {"task": "NER", "labels": ["location", "person", "organization"]}


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture()
def ner_schema_file(tmp_path, ner_schema):
    path = tmp_path / "ner_schema.json"
    ner_schema.dump(path)
    return str(path)


@pytest.fixture()
def re_schema_file(tmp_path, re_schema):
    path = tmp_path / "re_schema.json"
    re_schema.dump(path)
    return str(path)


@pytest.fixture()
def ee_schema_file(tmp_path, ee_schema):
    path = tmp_path / "ee_schema.json"
    ee_schema.dump(path)
    return str(path)


class TestScore:
    def test_relation_example(self, tmp_path, capsys):
        gold = write(tmp_path / "g.json", '{"founder": "Jobs, Apple"}')
        pred = write(tmp_path / "p.json", '{"founder": "Jobs, Apple | Wozniak, Apple"}')
        assert main(["score", "--task", "re", "--gold", gold, "--pred", pred]) == 0
        payload = json.loads(capsys.readouterr().out)
        expected = 0.05 + 0.10 * (2 / 3) + 0.10 + 0.75 * (2 / 3) ** 1.3 - 0.25 * 0.5
        assert payload["task"] == "RE"
        assert payload["total"] == pytest.approx(expected, abs=1e-12)
        assert payload["total"] == pytest.approx(0.53439, abs=2e-5)
        assert "components" in payload

    def test_gold_from_stdin(self, tmp_path, capsys, monkeypatch):
        pred = write(tmp_path / "p.json", '{"person": "Kevin"}')
        monkeypatch.setattr(sys, "stdin", io.StringIO('{"person": "Kevin"}\n'))
        assert main(["score", "--task", "NER", "--gold", "-", "--pred", pred]) == 0
        assert json.loads(capsys.readouterr().out)["total"] == pytest.approx(1.0, abs=1e-12)

    def test_unparseable_gold_is_data_error(self, tmp_path, capsys):
        gold = write(tmp_path / "g.json", "not an object")
        pred = write(tmp_path / "p.json", "{}")
        assert main(["score", "--task", "NER", "--gold", gold, "--pred", pred]) == 2
        assert "score" in capsys.readouterr().err

    def test_schema_task_mismatch(self, tmp_path, capsys, re_schema_file):
        gold = write(tmp_path / "g.json", "{}")
        assert (
            main(["score", "--task", "NER", "--gold", gold, "--pred", gold, "--schema", re_schema_file])
            == 2
        )

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        gold = write(tmp_path / "g.json", "{}")
        assert main(["score", "--task", "NER", "--gold", gold, "--pred", str(tmp_path / "nope")]) == 2


class TestAdvantage:
    def test_worked_example(self, capsys):
        assert main(["advantage", "--rewards", "1.0,0.5,0.0,0.5"]) == 0
        values = [float(part) for part in capsys.readouterr().out.strip().split(",")]
        assert values == pytest.approx([1.41421, 0.0, -1.41421, 0.0], abs=1e-5)

    def test_constant_rewards(self, capsys):
        assert main(["advantage", "--rewards", "0.7,0.7,0.7"]) == 0
        assert capsys.readouterr().out.strip() == "0.0,0.0,0.0"

    def test_bad_rewards(self, capsys):
        assert main(["advantage", "--rewards", "1.0,zebra"]) == 2
        assert main(["advantage", "--rewards", ","]) == 2


class TestUsageErrors:
    def test_missing_required_flag(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["score", "--task", "NER"])
        assert excinfo.value.code == 1

    def test_unknown_subcommand(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["conjure"])
        assert excinfo.value.code == 1

    def test_no_arguments(self):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 1

    def test_bad_choice(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["score", "--task", "PARSE", "--gold", "x", "--pred", "y"])
        assert excinfo.value.code == 1

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert "sfr-kit" in capsys.readouterr().out


class TestEval:
    def records_file(self, tmp_path, rows):
        return write(tmp_path / "records.jsonl", "\n".join(json.dumps(r) for r in rows) + "\n")

    def test_micro_table(self, tmp_path, capsys):
        path = self.records_file(
            tmp_path,
            [
                {"id": "a", "gold": '{"person": "Kevin"}', "pred": '{"person": "Kevin"}'},
                {"id": "b", "gold": '{"person": "Ada"}', "pred": '{"person": "Ada"}'},
            ],
        )
        assert main(["eval", "--task", "NER", "--records", path]) == 0
        out = capsys.readouterr().out
        assert "micro_f1" in out
        assert "1.0000" in out

    def test_json_format(self, tmp_path, capsys):
        path = self.records_file(
            tmp_path, [{"id": "a", "gold": '{"person": "Kevin"}', "pred": "{}"}]
        )
        assert main(["eval", "--task", "NER", "--records", path, "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["micro_f1"]["fn"] == 1

    def test_ee_auto_reports_both_metrics(self, tmp_path, capsys, ee_schema_file):
        gold = '{"adverse event": "developed: Subject: patient"}'
        path = self.records_file(tmp_path, [{"id": "a", "gold": gold, "pred": gold}])
        assert main(["eval", "--task", "EE", "--records", path, "--schema", ee_schema_file]) == 0
        out = capsys.readouterr().out
        assert "trigger_f1" in out
        assert "argument_f1" in out

    def test_exact_metric(self, tmp_path, capsys):
        path = self.records_file(
            tmp_path,
            [
                {"id": "a", "gold": '{"person": "Kevin"}', "pred": '{"person": " Kevin "}'},
                {"id": "b", "gold": '{"person": "Ada"}', "pred": '{"person": "Bob"}'},
            ],
        )
        assert main(["eval", "--task", "NER", "--records", path, "--slots", "person", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["exact_accuracy"]["person"] == 0.5

    def test_exact_metric_needs_slots(self, tmp_path, capsys):
        path = self.records_file(tmp_path, [{"id": "a", "gold": "{}", "pred": "{}"}])
        assert main(["eval", "--task", "NER", "--records", path, "--metric", "exact"]) == 2

    def test_report_dir(self, tmp_path, capsys):
        path = self.records_file(
            tmp_path, [{"id": "a", "gold": '{"person": "Kevin"}', "pred": '{"person": "Kevin"}'}]
        )
        report_dir = tmp_path / "report"
        assert main(["eval", "--task", "NER", "--records", path, "--report-dir", str(report_dir)]) == 0
        err = capsys.readouterr().err
        assert (report_dir / "report.json").exists()
        assert (report_dir / "report.tsv").exists()
        assert list(report_dir.glob("*.png"))
        assert err.count("wrote ") == 3

    def test_bad_records_file(self, tmp_path, capsys):
        path = write(tmp_path / "bad.jsonl", '{"id": "a"}\n')
        assert main(["eval", "--task", "NER", "--records", path]) == 2
        assert ":1" in capsys.readouterr().err

    def test_unparseable_gold_reports_ids(self, tmp_path, capsys):
        path = self.records_file(tmp_path, [{"id": "weird", "gold": "nope", "pred": "{}"}])
        assert main(["eval", "--task", "NER", "--records", path]) == 2
        assert "weird" in capsys.readouterr().err


class TestStreamline:
    def test_raw_lines(self, tmp_path, capsys, re_schema, re_schema_file):
        from sfr_kit import FULL, parse, serialize

        # raw mode is one target per line, so feed single-line full-form targets
        full_line = serialize(parse(RE_OUTPUT_PRETTY, re_schema).output, re_schema, FULL)
        rules_line = serialize(parse(RULES_OUTPUT_FULL, re_schema).output, re_schema, FULL)
        source = write(tmp_path / "targets.txt", full_line + "\n" + rules_line + "\n")
        assert main(["streamline", "--task", "RE", "--schema", re_schema_file, "--input", source]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == [RE_OUTPUT_CONCISE, canonical(RULES_OUTPUT_CONCISE)]

    def test_jsonl_rows(self, tmp_path, re_schema_file):
        rows = [{"input": "some text", "target": RE_OUTPUT_PRETTY, "id": 9}]
        source = write(tmp_path / "rows.jsonl", "\n".join(json.dumps(r) for r in rows) + "\n")
        out_path = tmp_path / "out.jsonl"
        assert (
            main(
                [
                    "streamline",
                    "--task",
                    "RE",
                    "--schema",
                    re_schema_file,
                    "--input",
                    source,
                    "--output",
                    str(out_path),
                    "--jsonl",
                ]
            )
            == 0
        )
        row = json.loads(out_path.read_text().strip())
        assert row["target"] == RE_OUTPUT_CONCISE
        assert row["input"] == "some text"
        assert row["id"] == 9

    def test_bad_target_names_line(self, tmp_path, capsys, re_schema_file):
        source = write(tmp_path / "targets.txt", RE_OUTPUT_CONCISE + "\nnot json\n")
        assert main(["streamline", "--task", "RE", "--schema", re_schema_file, "--input", source]) == 2
        assert ":2" in capsys.readouterr().err


class TestMix:
    def pool_file(self, tmp_path, name, size):
        rows = [{"input": f"{name}-{i}", "target": "{}"} for i in range(size)]
        return write(tmp_path / f"{name}.jsonl", "\n".join(json.dumps(r) for r in rows) + "\n")

    def test_two_pool_mix(self, tmp_path, capsys):
        a = self.pool_file(tmp_path, "a", 30)
        b = self.pool_file(tmp_path, "b", 30)
        out = tmp_path / "mixed.jsonl"
        code = main(
            ["mix", "--pool", a, "--pool", b, "--ratio", "1,3", "--total", "20", "--seed", "3", "--output", str(out)]
        )
        assert code == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary == {"total": 20, "by_pool": {"a": 5, "b": 15}}
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert len(rows) == 20
        assert all("source" in row for row in rows)

    def test_ratio_arity_mismatch(self, tmp_path, capsys):
        a = self.pool_file(tmp_path, "a", 5)
        out = tmp_path / "m.jsonl"
        assert main(["mix", "--pool", a, "--ratio", "1,2", "--total", "4", "--output", str(out)]) == 2

    def test_infeasible_total(self, tmp_path, capsys):
        a = self.pool_file(tmp_path, "a", 3)
        b = self.pool_file(tmp_path, "b", 100)
        out = tmp_path / "m.jsonl"
        code = main(["mix", "--pool", a, "--pool", b, "--ratio", "9,1", "--total", "50", "--output", str(out)])
        assert code == 2


class TestRender:
    def test_inline_text(self, capsys, ner_schema_file):
        assert main(["render", "--task", "NER", "--schema", ner_schema_file, "--text", "Kevin was here."]) == 0
        out = capsys.readouterr().out
        assert out.startswith("You are an information extraction assistant. Strictly extract 3 slots")
        assert out.rstrip("\n").endswith("The user input is:\nKevin was here.")

    def test_concise_mode(self, capsys, ner_schema_file):
        assert (
            main(["render", "--task", "NER", "--schema", ner_schema_file, "--text", "x", "--mode", "concise"])
            == 0
        )
        assert "Please use concise output with no empty fields." in capsys.readouterr().out

    def test_input_file(self, tmp_path, capsys, ee_schema_file):
        source = write(tmp_path / "input.txt", "the patient developed a rash\n")
        assert main(["render", "--task", "EE", "--schema", ee_schema_file, "--input-file", source]) == 0
        out = capsys.readouterr().out
        assert "the patient developed a rash" in out
        assert "Valid roles include" in out


class TestStats:
    def test_plain_lines(self, tmp_path, capsys):
        source = write(tmp_path / "texts.txt", "\n".join("tok " * n for n in (10, 20, 30, 40, 100)) + "\n")
        assert main(["stats", "--input", source]) == 0
        out = capsys.readouterr().out
        assert "P50" in out and "P99" in out

    def test_jsonl_field(self, tmp_path, capsys):
        rows = [{"target": "a b c"}, {"target": "a b c d e"}]
        source = write(tmp_path / "rows.jsonl", "\n".join(json.dumps(r) for r in rows) + "\n")
        assert main(["stats", "--input", source, "--jsonl", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["total"] == 2
        assert payload["buckets"][-1]["max_tokens"] == 5

    def test_missing_field(self, tmp_path, capsys):
        source = write(tmp_path / "rows.jsonl", '{"text": "a"}\n')
        assert main(["stats", "--input", source, "--jsonl"]) == 2

    def test_report_dir(self, tmp_path, capsys):
        source = write(tmp_path / "texts.txt", "a\na b\na b c\n")
        report_dir = tmp_path / "stats-report"
        assert main(["stats", "--input", source, "--report-dir", str(report_dir)]) == 0
        assert (report_dir / "report.json").exists()
        assert (report_dir / "length_buckets.png").exists()


class TestServeCommand:
    def test_unknown_transport(self, capsys):
        assert main(["serve", "--transport", "carrier-pigeon"]) == 2

    def test_stdio_subprocess(self, tmp_path, ner_schema_file):
        import shutil

        schemas = tmp_path / "schemas"
        schemas.mkdir()
        shutil.copy(ner_schema_file, schemas / "conll.json")
        requests = [
            json.dumps(
                {
                    "id": i,
                    "task": "NER",
                    "gold": '{"person": "Kevin"}',
                    "candidates": ['{"person": "Kevin"}', "{}"],
                    "schema": "conll",
                }
            )
            for i in range(3)
        ]
        result = subprocess.run(
            [sys.executable, "-m", "sfr_kit", "serve", "--schemas", str(schemas)],
            input="\n".join(requests) + "\n",
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert result.returncode == 0, result.stderr
        responses = [json.loads(line) for line in result.stdout.splitlines()]
        assert {response["id"] for response in responses} == {0, 1, 2}
        for response in responses:
            assert response["rewards"][0] == pytest.approx(1.0, abs=1e-12)
