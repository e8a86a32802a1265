"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad files, unparseable
golds, infeasible arguments).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .codec import infer_schema
from .config import DEFAULT_CONFIG, ConfigError, SfrConfig
from .evaluation import EvalRecord, argument_f1, exact_accuracy, length_buckets, micro_f1, trigger_f1
from .grpo import ADVANTAGE_EPSILON, group_advantages
from .pipeline import (
    CONCISE_PROMPT,
    DataError,
    DatasetPool,
    FULL_PROMPT,
    TargetParseError,
    mix_pools,
    render_prompt,
    streamline,
)
from .rewards import GoldUnparseableError, score
from .schema import SchemaError, SchemaRegistry, Task, TaskSchema
from .service import DEFAULT_WORKERS, serve_stdio, serve_tcp

_DATA_ERRORS = (DataError, SchemaError, ConfigError, GoldUnparseableError, OSError)


class _Parser(argparse.ArgumentParser):
    """argparse's default exit code for usage errors is 2; remap it to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _task_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--task", required=True, type=str.upper, choices=[t.value for t in Task])


def _load_schema(args, *texts: str) -> TaskSchema:
    task = Task.parse(args.task)
    if getattr(args, "schema", None):
        schema = TaskSchema.load(args.schema)
        if schema.task is not task:
            raise SchemaError(f"--task {task.value} does not match schema task {schema.task.value}")
        return schema
    return infer_schema(task, *texts)


def _load_config(args) -> SfrConfig:
    if getattr(args, "config", None):
        return SfrConfig.load(args.config)
    return DEFAULT_CONFIG


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _cmd_score(args) -> int:
    gold = _read(args.gold).strip()
    pred = _read(args.pred).strip()
    schema = _load_schema(args, gold, pred)
    breakdown = score(gold, pred, schema, _load_config(args))
    print(json.dumps(breakdown.to_dict(), ensure_ascii=False, indent=2))
    return 0


def _cmd_advantage(args) -> int:
    try:
        rewards = [float(part) for part in args.rewards.split(",") if part.strip()]
    except ValueError:
        raise DataError(f"--rewards must be comma-separated numbers, got {args.rewards!r}") from None
    if not rewards:
        raise DataError("--rewards is empty")
    print(",".join(repr(a) for a in group_advantages(rewards, args.epsilon)))
    return 0


def _load_records(path: str) -> list[EvalRecord]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(row, dict) or "gold" not in row or "pred" not in row:
                raise DataError(f"{path}:{lineno}: record needs 'gold' and 'pred' fields")
            records.append(
                EvalRecord(
                    example_id=str(row.get("id", lineno)),
                    gold=str(row["gold"]),
                    pred=str(row["pred"]),
                    source_text=row.get("source"),
                )
            )
    if not records:
        raise DataError(f"{path}: no records")
    return records


def _cmd_eval(args) -> int:
    from . import reporting

    records = _load_records(args.records)
    task = Task.parse(args.task)
    metric = args.metric
    if metric == "auto":
        metric = "exact" if args.slots else ("trigger+argument" if task is Task.EE else "micro")
    if metric == "exact":
        if not args.slots:
            raise DataError("--metric exact needs --slots")
        accuracy = exact_accuracy(records, [s.strip() for s in args.slots.split(",") if s.strip()])
        if args.format == "json":
            print(json.dumps({"exact_accuracy": accuracy}, ensure_ascii=False, indent=2))
        else:
            print(reporting.exact_table(accuracy))
        if args.report_dir:
            for path in reporting.write_exact_report(accuracy, args.report_dir):
                print(f"wrote {path}", file=sys.stderr)
        return 0
    schema = _load_schema(args, *(r.gold for r in records[:50]))
    if metric == "micro":
        reports = [micro_f1(records, schema)]
    elif metric == "trigger":
        reports = [trigger_f1(records, schema)]
    elif metric == "argument":
        reports = [argument_f1(records, schema)]
    else:
        reports = [trigger_f1(records, schema), argument_f1(records, schema)]
    if args.format == "json":
        print(json.dumps({r.metric: r.to_dict() for r in reports}, ensure_ascii=False, indent=2))
    else:
        print(reporting.metric_table(reports))
    if args.report_dir:
        for path in reporting.write_metric_report(reports, args.report_dir):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_streamline(args) -> int:
    schema = TaskSchema.load(args.schema)
    task = Task.parse(args.task)
    if schema.task is not task:
        raise SchemaError(f"--task {task.value} does not match schema task {schema.task.value}")
    out = sys.stdout if args.output == "-" else open(args.output, "w", encoding="utf-8")
    try:
        with open(args.input, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                if args.jsonl:
                    try:
                        row = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise DataError(f"{args.input}:{lineno}: invalid JSON: {exc}") from exc
                    if not isinstance(row, dict) or "target" not in row:
                        raise DataError(f"{args.input}:{lineno}: row needs a 'target' field")
                    try:
                        row["target"] = streamline(str(row["target"]), schema)
                    except TargetParseError as exc:
                        raise TargetParseError(f"{args.input}:{lineno}: {exc}") from None
                    out.write(json.dumps(row, ensure_ascii=False) + "\n")
                else:
                    try:
                        out.write(streamline(line, schema) + "\n")
                    except TargetParseError as exc:
                        raise TargetParseError(f"{args.input}:{lineno}: {exc}") from None
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_mix(args) -> int:
    try:
        weights = [float(part) for part in args.ratio.split(",") if part.strip()]
    except ValueError:
        raise DataError(f"--ratio must be comma-separated numbers, got {args.ratio!r}") from None
    if len(weights) != len(args.pool):
        raise DataError(f"--ratio has {len(weights)} entries for {len(args.pool)} pools")
    pools = [(DatasetPool.load_jsonl(path), weight) for path, weight in zip(args.pool, weights)]
    mixed = mix_pools(pools, total=args.total, seed=args.seed)
    mixed.dump_jsonl(args.output)
    counts: dict[str, int] = {}
    for item in mixed.items:
        counts[item.source_pool or "?"] = counts.get(item.source_pool or "?", 0) + 1
    print(json.dumps({"total": len(mixed.items), "by_pool": counts}))
    return 0


def _cmd_render(args) -> int:
    schema = TaskSchema.load(args.schema)
    task = Task.parse(args.task)
    if schema.task is not task:
        raise SchemaError(f"--task {task.value} does not match schema task {schema.task.value}")
    text = args.text if args.text is not None else _read(args.input_file).rstrip("\n")
    print(render_prompt(schema, text, args.mode))
    return 0


def _cmd_stats(args) -> int:
    from . import reporting

    texts = []
    with open(args.input, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            if args.jsonl:
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{args.input}:{lineno}: invalid JSON: {exc}") from exc
                if not isinstance(row, dict) or args.field not in row:
                    raise DataError(f"{args.input}:{lineno}: row lacks field {args.field!r}")
                texts.append(str(row[args.field]))
            else:
                texts.append(line)
    if not texts:
        raise DataError(f"{args.input}: no texts")
    buckets = length_buckets(texts)
    if args.format == "json":
        print(json.dumps(buckets.to_dict(), ensure_ascii=False, indent=2))
    else:
        print(reporting.buckets_table(buckets))
    if args.report_dir:
        for path in reporting.write_stats_report(buckets, args.report_dir):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    registry = SchemaRegistry.load_dir(args.schemas) if args.schemas else None
    config = _load_config(args)
    transport = args.transport
    if transport == "stdio":
        serve_stdio(registry, config, workers=args.workers)
        return 0
    if transport.startswith("tcp:"):
        try:
            port = int(transport.split(":", 1)[1])
        except ValueError:
            raise DataError(f"bad tcp port in {transport!r}") from None
        serve_tcp(args.host, port, registry, config, workers=args.workers)
        return 0
    raise DataError(f"unknown transport {transport!r}; use stdio or tcp:PORT")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sfr-kit", description="Structured-extraction rewards, evaluation, and data tools.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("score", help="reward one prediction against one gold")
    _task_arg(p)
    p.add_argument("--gold", required=True, help="path to the gold generation ('-' for stdin)")
    p.add_argument("--pred", required=True, help="path to the predicted generation")
    p.add_argument("--schema", help="schema JSON; inferred from the texts when omitted")
    p.add_argument("--config", help="reward config JSON")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("advantage", help="group-normalize a comma-separated reward list")
    p.add_argument("--rewards", required=True)
    p.add_argument("--epsilon", type=float, default=ADVANTAGE_EPSILON)
    p.set_defaults(func=_cmd_advantage)

    p = sub.add_parser("eval", help="corpus metrics from a JSONL records file")
    _task_arg(p)
    p.add_argument("--records", required=True, help="JSONL rows {id, gold, pred}")
    p.add_argument("--schema", help="schema JSON; inferred from golds when omitted")
    p.add_argument("--metric", choices=["auto", "micro", "trigger", "argument", "exact"], default="auto")
    p.add_argument("--slots", help="comma-separated slot names (exact accuracy)")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--report-dir", help="also write report.json/report.tsv/charts here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("streamline", help="re-encode full-format targets concisely")
    _task_arg(p)
    p.add_argument("--schema", required=True)
    p.add_argument("--input", required=True, help="targets, one per line (or JSONL with --jsonl)")
    p.add_argument("--output", default="-")
    p.add_argument("--jsonl", action="store_true", help="rows are {input, target} objects")
    p.set_defaults(func=_cmd_streamline)

    p = sub.add_parser("mix", help="ratio-sample several pools into one shuffled file")
    p.add_argument("--pool", action="append", required=True, help="JSONL pool path (repeat per pool)")
    p.add_argument("--ratio", required=True, help="comma-separated weights, one per pool")
    p.add_argument("--total", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_mix)

    p = sub.add_parser("render", help="render the instruction prompt for an input")
    _task_arg(p)
    p.add_argument("--schema", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text")
    group.add_argument("--input-file")
    p.add_argument("--mode", choices=[FULL_PROMPT, CONCISE_PROMPT], default=FULL_PROMPT)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("stats", help="token-length percentile buckets for a text file")
    p.add_argument("--input", required=True, help="one text per line (or JSONL with --jsonl)")
    p.add_argument("--jsonl", action="store_true")
    p.add_argument("--field", default="target", help="JSONL field to measure (default: target)")
    p.add_argument("--format", choices=["table", "json"], default="table")
    p.add_argument("--report-dir")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("serve", help="NDJSON scoring service on stdio or TCP")
    p.add_argument("--transport", default="stdio", help="stdio (default) or tcp:PORT (0 picks a port)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--schemas", help="directory of schema JSON files, id = file stem")
    p.add_argument("--config")
    p.add_argument("--workers", type=int, default=DEFAULT_WORKERS)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _DATA_ERRORS as exc:
        print(f"sfr-kit {args.command}: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
