"""Corpus evaluation: micro-F1 over units, exact slot accuracy, length stats.

Metric conventions differ from the reward on one edge by design: an
empty-gold empty-pred record contributes nothing to micro counts (F1 of an
all-empty corpus is 0, not 1), because evaluation reports detection quality
rather than a training signal.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .codec import find_json_object, parse
from .rewards import GoldUnparseableError
from .schema import Task, TaskSchema
from .units import EeUnits, extract_units


@dataclass(frozen=True)
class EvalRecord:
    """One evaluation row: gold and predicted generations for an example."""

    example_id: str
    gold: str
    pred: str
    source_text: str | None = None


@dataclass(frozen=True)
class MetricReport:
    """Micro-averaged counts and scores, with a per-label breakdown."""

    metric: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    per_label: dict[str, tuple[int, int, int]]
    record_count: int

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "records": self.record_count,
            "per_label": {label: list(counts) for label, counts in self.per_label.items()},
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if 2 * tp + fp + fn else 0.0
    return precision, recall, f1


def _unit_pairs(records: Iterable[EvalRecord], schema: TaskSchema):
    """Parse every record; gold failures abort with the offending ids."""
    bad_ids = []
    parsed = []
    for record in records:
        gold_report = parse(record.gold, schema)
        if not gold_report.ok:
            bad_ids.append(record.example_id)
            continue
        pred_report = parse(record.pred, schema)
        parsed.append((extract_units(gold_report.output), extract_units(pred_report.output)))
    if bad_ids:
        raise GoldUnparseableError(
            f"gold unparseable for {len(bad_ids)} record(s): {', '.join(bad_ids[:10])}",
            record_ids=tuple(bad_ids),
        )
    return parsed


def _micro_over(
    records: list[EvalRecord],
    schema: TaskSchema,
    metric: str,
    unit_getter: Callable,
    label_of: Callable,
) -> MetricReport:
    tp = fp = fn = 0
    per_label: dict[str, list[int]] = {}
    for gold_units, pred_units in _unit_pairs(records, schema):
        gold_set = unit_getter(gold_units)
        pred_set = unit_getter(pred_units)
        for unit in gold_set & pred_set:
            per_label.setdefault(label_of(unit), [0, 0, 0])[0] += 1
        for unit in pred_set - gold_set:
            per_label.setdefault(label_of(unit), [0, 0, 0])[1] += 1
        for unit in gold_set - pred_set:
            per_label.setdefault(label_of(unit), [0, 0, 0])[2] += 1
        tp += len(gold_set & pred_set)
        fp += len(pred_set - gold_set)
        fn += len(gold_set - pred_set)
    precision, recall, f1 = _prf(tp, fp, fn)
    return MetricReport(
        metric=metric,
        tp=tp,
        fp=fp,
        fn=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        per_label={label: tuple(counts) for label, counts in sorted(per_label.items())},
        record_count=len(records),
    )


def micro_f1(records: list[EvalRecord], schema: TaskSchema) -> MetricReport:
    """Micro-F1 over (label, mention) pairs for NER or (type, head, tail) triples for RE."""
    if schema.task is Task.NER:
        return _micro_over(records, schema, "micro_f1", lambda u: u.pairs, lambda unit: unit[0])
    if schema.task is Task.RE:
        return _micro_over(records, schema, "micro_f1", lambda u: u.triples, lambda unit: unit[0])
    raise ValueError("micro_f1 covers NER and RE; use trigger_f1/argument_f1 for EE")


def trigger_f1(records: list[EvalRecord], schema: TaskSchema) -> MetricReport:
    """Micro-F1 over (event type, trigger) pairs."""
    if schema.task is not Task.EE:
        raise ValueError("trigger_f1 needs an EE schema")
    return _micro_over(records, schema, "trigger_f1", lambda u: u.triggers, lambda unit: unit[0])


def argument_f1(records: list[EvalRecord], schema: TaskSchema) -> MetricReport:
    """Micro-F1 over pooled (event type, role, argument) triples.

    Pooling ignores which trigger an argument hangs off, so this is a looser
    check than the reward's per-group alignment; the two agree whenever every
    group matches uniquely.
    """
    if schema.task is not Task.EE:
        raise ValueError("argument_f1 needs an EE schema")

    def pooled(units: EeUnits):
        return units.argument_triples()

    return _micro_over(records, schema, "argument_f1", pooled, lambda unit: unit[0])


def exact_accuracy(records: list[EvalRecord], slots: list[str]) -> dict[str, float]:
    """Per-slot exact string match after surrounding-whitespace trim.

    A slot missing from the prediction counts as a match only when the gold
    slot is empty. An unparseable prediction behaves as an empty object;
    unparseable golds raise with the offending record ids.
    """
    if not records:
        raise ValueError("exact_accuracy needs at least one record")
    if not slots:
        raise ValueError("exact_accuracy needs at least one slot name")

    def slot_map(text: str) -> dict[str, str] | None:
        found = find_json_object(text)
        if found is None:
            return None
        out: dict[str, str] = {}
        for key, value in found[0]:
            key = key.strip()
            if key in out:
                continue
            out[key] = value if isinstance(value, str) else json.dumps(value, ensure_ascii=False)
        return out

    bad_ids = [record.example_id for record in records if slot_map(record.gold) is None]
    if bad_ids:
        raise GoldUnparseableError(
            f"gold unparseable for {len(bad_ids)} record(s): {', '.join(bad_ids[:10])}",
            record_ids=tuple(bad_ids),
        )
    matches = {slot: 0 for slot in slots}
    for record in records:
        gold_map = slot_map(record.gold) or {}
        pred_map = slot_map(record.pred) or {}
        for slot in slots:
            gold_value = gold_map.get(slot, "").strip()
            if slot in pred_map:
                if pred_map[slot].strip() == gold_value:
                    matches[slot] += 1
            elif gold_value == "":
                matches[slot] += 1
    return {slot: matches[slot] / len(records) for slot in slots}


def whitespace_tokens(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class BucketStats:
    """Token-count stats for examples at or below one percentile threshold."""

    percentile: int
    threshold: int
    count: int
    min_tokens: int
    mean_tokens: float
    max_tokens: int


@dataclass(frozen=True)
class LengthBuckets:
    buckets: tuple[BucketStats, ...]
    tokenizer_id: str
    total: int

    def to_dict(self) -> dict:
        return {
            "tokenizer": self.tokenizer_id,
            "total": self.total,
            "buckets": [
                {
                    "percentile": b.percentile,
                    "threshold": b.threshold,
                    "count": b.count,
                    "min_tokens": b.min_tokens,
                    "mean_tokens": b.mean_tokens,
                    "max_tokens": b.max_tokens,
                }
                for b in self.buckets
            ],
        }


PERCENTILES = (50, 70, 99)


def length_buckets(
    texts: list[str],
    tokenizer: Callable[[str], int] = whitespace_tokens,
    tokenizer_id: str = "whitespace",
    percentiles: tuple[int, ...] = PERCENTILES,
) -> LengthBuckets:
    """Nearest-rank percentile buckets over token counts.

    The Pk threshold is the ceil(k/100 * n)-th order statistic and a bucket
    holds every example whose count is <= that threshold (so buckets nest).
    """
    if not texts:
        raise ValueError("length_buckets needs at least one text")
    counts = sorted(tokenizer(text) for text in texts)
    n = len(counts)
    buckets = []
    for percentile in percentiles:
        if not 0 < percentile <= 100:
            raise ValueError(f"percentile out of range: {percentile}")
        threshold = counts[math.ceil(percentile / 100 * n) - 1]
        inside = counts[: bisect.bisect_right(counts, threshold)]
        buckets.append(
            BucketStats(
                percentile=percentile,
                threshold=threshold,
                count=len(inside),
                min_tokens=inside[0],
                mean_tokens=math.fsum(inside) / len(inside),
                max_tokens=inside[-1],
            )
        )
    return LengthBuckets(buckets=tuple(buckets), tokenizer_id=tokenizer_id, total=n)
