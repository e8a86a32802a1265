"""Dataset curation: target streamlining, ratio mixing, prompt rendering.

All sampling uses a fresh ``random.Random(seed)`` per call, so a given
(seed, arguments) pair is reproducible regardless of interpreter-global RNG
state. Pools are JSONL files of {"input": ..., "target": ...} rows; rows
written by mixing carry a "source" object naming the originating pool and
row index.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .codec import CONCISE, parse, serialize
from .outputs import ParseStatus
from .schema import Task, TaskSchema


class DataError(ValueError):
    """Raised for malformed pool files or infeasible pipeline arguments."""


class TargetParseError(DataError):
    """A training target failed strict parsing; carries the diagnosis."""


@dataclass(frozen=True)
class PoolItem:
    input: str
    target: str
    source_pool: str | None = None
    source_index: int | None = None


@dataclass
class DatasetPool:
    """A named list of (input, target) rows, optionally tied to a task/schema."""

    name: str
    items: list[PoolItem] = field(default_factory=list)
    task: Task | None = None
    schema: TaskSchema | None = None

    def __len__(self) -> int:
        return len(self.items)

    @classmethod
    def load_jsonl(
        cls, path: str | Path, name: str | None = None, task: Task | None = None, schema: TaskSchema | None = None
    ) -> "DatasetPool":
        path = Path(path)
        items: list[PoolItem] = []
        with path.open(encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
                if not isinstance(row, dict) or "input" not in row or "target" not in row:
                    raise DataError(f"{path}:{lineno}: row needs 'input' and 'target' fields")
                source = row.get("source") or {}
                items.append(
                    PoolItem(
                        input=str(row["input"]),
                        target=str(row["target"]),
                        source_pool=source.get("pool"),
                        source_index=source.get("index"),
                    )
                )
        return cls(name=name or path.stem, items=items, task=task, schema=schema)

    def dump_jsonl(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8") as handle:
            for item in self.items:
                row: dict = {"input": item.input, "target": item.target}
                if item.source_pool is not None:
                    row["source"] = {"pool": item.source_pool, "index": item.source_index}
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")


def streamline(target: str, schema: TaskSchema) -> str:
    """Re-encode a full-format training target in concise form.

    Targets are trusted data, so parsing is strict: any grammar or schema
    violation raises TargetParseError with the parser's diagnosis instead of
    silently shipping a corrupted target.
    """
    report = parse(target, schema, strict=True)
    if report.status is not ParseStatus.OK:
        raise TargetParseError(f"target rejected: {report.diagnosis()}")
    return serialize(report.output, schema, CONCISE)


def streamline_pool(pool: DatasetPool) -> DatasetPool:
    """Streamline every target in a pool; requires the pool's schema."""
    if pool.schema is None:
        raise DataError(f"pool {pool.name!r} has no schema; streamlining needs one")
    items = []
    for index, item in enumerate(pool.items):
        try:
            concise = streamline(item.target, pool.schema)
        except TargetParseError as exc:
            raise TargetParseError(f"{pool.name}[{index}]: {exc}") from None
        items.append(
            PoolItem(
                input=item.input,
                target=concise,
                source_pool=item.source_pool if item.source_pool is not None else pool.name,
                source_index=item.source_index if item.source_index is not None else index,
            )
        )
    return DatasetPool(name=pool.name, items=items, task=pool.task, schema=pool.schema)


def sample_streamlined_subset(
    re_pool: DatasetPool, ee_pool: DatasetPool, n_re: int, n_ee: int, seed: int
) -> DatasetPool:
    """Draw the streamlined-alignment subset: n_re RE rows plus n_ee EE rows.

    Sampling is without replacement per pool; every sampled target is
    re-encoded concisely. Zero counts are allowed and yield an empty pool.
    """
    for pool, n in ((re_pool, n_re), (ee_pool, n_ee)):
        if n < 0:
            raise DataError("sample sizes must be non-negative")
        if n > len(pool.items):
            raise DataError(f"cannot draw {n} rows from pool {pool.name!r} of size {len(pool.items)}")
        if n > 0 and pool.schema is None:
            raise DataError(f"pool {pool.name!r} has no schema; streamlining needs one")
    rng = random.Random(seed)
    items: list[PoolItem] = []
    for pool, n in ((re_pool, n_re), (ee_pool, n_ee)):
        for index in rng.sample(range(len(pool.items)), n):
            item = pool.items[index]
            try:
                concise = streamline(item.target, pool.schema)
            except TargetParseError as exc:
                raise TargetParseError(f"{pool.name}[{index}]: {exc}") from None
            items.append(PoolItem(item.input, concise, source_pool=pool.name, source_index=index))
    return DatasetPool(name="streamlined", items=items, task=None, schema=None)


def allocate_largest_remainder(weights: list[float], total: int) -> list[int]:
    """Integer allocation proportional to weights, exact remainders deciding ties.

    Floor quotas first, then leftover units go to the largest fractional
    parts; equal fractions favor the lower index. Computed with Fractions so
    the tie-break is deterministic rather than float-noise dependent.
    """
    if total < 0:
        raise DataError("total must be non-negative")
    if not weights or any(w <= 0 for w in weights):
        raise DataError("weights must be positive")
    denom = sum(Fraction(w) for w in weights)
    quotas = [Fraction(total) * Fraction(w) / denom for w in weights]
    base = [int(q) for q in quotas]
    leftover = total - sum(base)
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def mix_pools(pools: list[tuple[DatasetPool, float]], total: int, seed: int) -> DatasetPool:
    """Sample a mixed dataset at the given ratio, then shuffle.

    Allocation follows the largest-remainder rule; each pool is sampled
    without replacement, so its allocation may not exceed its size.
    """
    if not pools:
        raise DataError("mixing needs at least one pool")
    if total < len(pools):
        raise DataError(f"total {total} is smaller than the number of pools ({len(pools)})")
    counts = allocate_largest_remainder([weight for _, weight in pools], total)
    for (pool, _), count in zip(pools, counts):
        if count > len(pool.items):
            raise DataError(
                f"ratio assigns {count} rows to pool {pool.name!r} but it only has {len(pool.items)}"
            )
    rng = random.Random(seed)
    items: list[PoolItem] = []
    for (pool, _), count in zip(pools, counts):
        for index in rng.sample(range(len(pool.items)), count):
            item = pool.items[index]
            items.append(
                PoolItem(
                    input=item.input,
                    target=item.target,
                    source_pool=item.source_pool if item.source_pool is not None else pool.name,
                    source_index=item.source_index if item.source_index is not None else index,
                )
            )
    rng.shuffle(items)
    tasks = {pool.task for pool, _ in pools}
    task = tasks.pop() if len(tasks) == 1 else None
    return DatasetPool(name="mix", items=items, task=task, schema=None)


_NER_INSTRUCTION = (
    "You are an information extraction assistant. Strictly extract {count} slots "
    "({slots}) from the user input. Slot values must be exact substrings of the input. "
    "If a slot has multiple values, join them with ' | ' in the order of first appearance "
    "and remove duplicates."
)
_RE_INSTRUCTION = (
    "You are an information extraction assistant. Strictly extract relation pairs for the "
    "following relation types ({types}) from the user input. Values must be exact substrings "
    "of the input. If a relation has multiple pairs, join them with ' | ' in the order of "
    "first appearance, and each pair must be formatted as 'word1, word2'."
)
_EE_INSTRUCTION = (
    "You are an information extraction assistant. Strictly extract events for the following "
    "event types from the user input and reply with a single JSON object only. The keys MUST "
    "be exactly these event types: [{event_types}]. For each event type, group arguments by "
    "trigger. Format each group as `TRIGGER: ROLE: argument; ROLE: argument`. Valid roles "
    "include: [{roles}]."
)
_CONCISE_SENTENCE = "Please use concise output with no empty fields."
_INPUT_LEAD = "The user input is:"

FULL_PROMPT = "full"
CONCISE_PROMPT = "concise"


def render_prompt(schema: TaskSchema, input_text: str, mode: str = FULL_PROMPT) -> str:
    """Render the task instruction plus the input text.

    ``concise`` mode inserts the no-empty-fields sentence used with
    streamlined targets; ``full`` is the plain instruction.
    """
    if mode not in (FULL_PROMPT, CONCISE_PROMPT):
        raise ValueError(f"mode must be {FULL_PROMPT!r} or {CONCISE_PROMPT!r}, got {mode!r}")
    if schema.task is Task.NER:
        instruction = _NER_INSTRUCTION.format(count=len(schema.labels), slots=", ".join(schema.labels))
    elif schema.task is Task.RE:
        instruction = _RE_INSTRUCTION.format(types=", ".join(schema.labels))
    else:
        instruction = _EE_INSTRUCTION.format(
            event_types=", ".join(schema.labels), roles=", ".join(schema.roles)
        )
    if mode == CONCISE_PROMPT:
        instruction = f"{instruction} {_CONCISE_SENTENCE}"
    return f"{instruction} {_INPUT_LEAD}\n{input_text}"
