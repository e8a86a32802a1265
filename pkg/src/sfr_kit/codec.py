"""Decode model generations into structured outputs, and encode them back.

The wire format is a single-line JSON object whose values are flat strings:

* NER: ``{"person": "Kevin | Therese", "location": ""}``, mentions joined
  with `` | ``.
* RE: ``{"used for": "surface, algorithm"}``, pairs joined with `` | ``,
  each pair split at its first ``, `` into (head, tail). Heads therefore
  cannot contain ``, ``; tails may.
* EE: ``{"adverse event": "developed: Subject: patient; Effect: ..."}``,
  trigger groups joined with `` | ``, segments split on ``; ``, the first
  segment's first ``: `` separates the trigger, and each remaining segment
  starts with a role name followed by ``: ``. Role names from the schema are
  matched longest-first so arguments may themselves contain ``: ``; an
  argument that begins with ``<role>: `` for a schema role is ambiguous and
  will be re-split on parse.

Parsing is salvage-oriented: the first decodable JSON object anywhere in the
text is used, surrounding prose is ignored (with an issue recorded), and in
lenient mode malformed fragments are dropped individually. Strict mode turns
any issue into a FAILED report; it never raises on bad input.
"""

from __future__ import annotations

import json

from .outputs import (
    EeOutput,
    NerOutput,
    Output,
    ParseIssue,
    ParseReport,
    ParseStatus,
    ReOutput,
    TriggerGroup,
    dedupe,
)
from .schema import SchemaError, Task, TaskSchema

VALUE_SEP = " | "
PAIR_SEP = ", "
ROLE_SEP = ": "
SEGMENT_SEP = "; "

_decoder = json.JSONDecoder(object_pairs_hook=lambda pairs: _ObjectPairs(pairs))


class _ObjectPairs(list):
    """Marker wrapper so nested objects stay distinguishable from strings."""


def find_json_object(text: str) -> tuple[list[tuple[str, object]], int, int] | None:
    """Locate the first decodable JSON object in ``text``.

    Returns (key-value pairs in appearance order, start, end) or None. Values
    are raw decoded JSON values; nested objects appear as pair lists.
    """
    start = text.find("{")
    while start != -1:
        try:
            obj, end = _decoder.raw_decode(text, start)
        except json.JSONDecodeError:
            start = text.find("{", start + 1)
            continue
        if isinstance(obj, _ObjectPairs):
            return list(obj), start, end
        start = text.find("{", start + 1)
    return None


def empty_output(task: Task) -> Output:
    if task is Task.NER:
        return NerOutput({})
    if task is Task.RE:
        return ReOutput({})
    return EeOutput({})


def _collect_slots(
    text: str, schema: TaskSchema, issues: list[ParseIssue]
) -> dict[str, str] | None:
    """Pull label -> raw string values out of the first JSON object in text."""
    found = find_json_object(text)
    if found is None:
        issues.append(ParseIssue("output", "no parseable JSON object in generation"))
        return None
    pairs, start, end = found
    if text[:start].strip() or text[end:].strip():
        issues.append(ParseIssue("output", "ignored text surrounding the JSON object"))
    labels = schema.label_set
    raw: dict[str, str] = {}
    for key, value in pairs:
        key = key.strip()
        if key not in labels:
            issues.append(ParseIssue(f"key {key!r}", "not a schema label, dropped"))
            continue
        if key in raw:
            issues.append(ParseIssue(f"key {key!r}", "duplicate key, kept first value"))
            continue
        if not isinstance(value, str):
            issues.append(ParseIssue(f"key {key!r}", "value is not a string, dropped"))
            continue
        raw[key] = value
    return raw


def _finish(
    output: Output, task: Task, strict: bool, issues: list[ParseIssue], parsed: bool
) -> ParseReport:
    if not parsed or (strict and issues):
        return ParseReport(empty_output(task), ParseStatus.FAILED, tuple(issues))
    status = ParseStatus.OK if not issues else ParseStatus.RECOVERED
    return ParseReport(output, status, tuple(issues))


def parse_ner(text: str, schema: TaskSchema, strict: bool = False) -> ParseReport:
    """Decode an NER generation. Missing labels become empty slots."""
    if schema.task is not Task.NER:
        raise SchemaError(f"parse_ner needs an NER schema, got {schema.task.value}")
    issues: list[ParseIssue] = []
    raw = _collect_slots(text, schema, issues)
    if raw is None:
        return _finish(empty_output(schema.task), schema.task, strict, issues, parsed=False)
    slots = {label: dedupe(raw.get(label, "").split(VALUE_SEP)) for label in schema.labels}
    return _finish(NerOutput(slots), schema.task, strict, issues, parsed=True)


def parse_re(text: str, schema: TaskSchema, strict: bool = False) -> ParseReport:
    """Decode an RE generation into (head, tail) pairs per relation type."""
    if schema.task is not Task.RE:
        raise SchemaError(f"parse_re needs an RE schema, got {schema.task.value}")
    issues: list[ParseIssue] = []
    raw = _collect_slots(text, schema, issues)
    if raw is None:
        return _finish(empty_output(schema.task), schema.task, strict, issues, parsed=False)
    relations: dict[str, list[tuple[str, str]]] = {}
    for label in schema.labels:
        pairs: list[tuple[str, str]] = []
        for chunk in raw.get(label, "").split(VALUE_SEP):
            chunk = chunk.strip()
            if not chunk:
                continue
            if PAIR_SEP not in chunk:
                issues.append(ParseIssue(f"slot {label!r}", f"pair {chunk!r} lacks {PAIR_SEP!r}, dropped"))
                continue
            head, tail = chunk.split(PAIR_SEP, 1)
            head, tail = head.strip(), tail.strip()
            if not head or not tail:
                issues.append(ParseIssue(f"slot {label!r}", f"pair {chunk!r} has an empty side, dropped"))
                continue
            pairs.append((head, tail))
        relations[label] = pairs
    return _finish(ReOutput(relations), schema.task, strict, issues, parsed=True)


def _split_role(
    segment: str, roles_longest_first: list[str], strict: bool, where: str, issues: list[ParseIssue]
) -> tuple[str, str] | None:
    for role in roles_longest_first:
        prefix = role + ROLE_SEP
        if segment.startswith(prefix):
            return role, segment[len(prefix):].strip()
    if strict and roles_longest_first:
        issues.append(ParseIssue(where, f"segment {segment!r} does not start with a schema role"))
        return None
    if ROLE_SEP in segment:
        role, arg = segment.split(ROLE_SEP, 1)
        return role.strip(), arg.strip()
    issues.append(ParseIssue(where, f"segment {segment!r} lacks {ROLE_SEP!r}, dropped"))
    return None


def parse_ee(text: str, schema: TaskSchema, strict: bool = False) -> ParseReport:
    """Decode an EE generation into trigger groups per event type.

    A group whose first segment has no ``: `` is a bare trigger with no
    arguments; that is the encoding of an argument-less event.
    """
    if schema.task is not Task.EE:
        raise SchemaError(f"parse_ee needs an EE schema, got {schema.task.value}")
    issues: list[ParseIssue] = []
    raw = _collect_slots(text, schema, issues)
    if raw is None:
        return _finish(empty_output(schema.task), schema.task, strict, issues, parsed=False)
    roles_longest_first = sorted(schema.roles, key=len, reverse=True)
    events: dict[str, list[TriggerGroup]] = {}
    for label in schema.labels:
        groups: list[TriggerGroup] = []
        for chunk in raw.get(label, "").split(VALUE_SEP):
            chunk = chunk.strip()
            if not chunk:
                continue
            where = f"slot {label!r}"
            segments = chunk.split(SEGMENT_SEP)
            first = segments[0]
            if ROLE_SEP in first:
                trigger, rest = first.split(ROLE_SEP, 1)
                tail_segments = [rest] + segments[1:]
            else:
                trigger, tail_segments = first, segments[1:]
            trigger = trigger.strip()
            if not trigger:
                issues.append(ParseIssue(where, f"group {chunk!r} has an empty trigger, dropped"))
                continue
            args: list[tuple[str, str]] = []
            for segment in tail_segments:
                segment = segment.strip()
                if not segment:
                    continue
                split = _split_role(segment, roles_longest_first, strict, where, issues)
                if split is None:
                    continue
                role, arg = split
                if not role or not arg:
                    issues.append(ParseIssue(where, f"segment {segment!r} has an empty side, dropped"))
                    continue
                args.append((role, arg))
            groups.append(TriggerGroup(trigger, tuple(args)))
        events[label] = groups
    return _finish(EeOutput(events), schema.task, strict, issues, parsed=True)


def parse(text: str, schema: TaskSchema, strict: bool = False) -> ParseReport:
    """Decode a generation according to the schema's task."""
    if schema.task is Task.NER:
        return parse_ner(text, schema, strict)
    if schema.task is Task.RE:
        return parse_re(text, schema, strict)
    return parse_ee(text, schema, strict)


FULL = "full"
CONCISE = "concise"


def _encode_value(output: Output, label: str) -> str:
    if isinstance(output, NerOutput):
        return VALUE_SEP.join(output.slots.get(label, []))
    if isinstance(output, ReOutput):
        return VALUE_SEP.join(f"{head}{PAIR_SEP}{tail}" for head, tail in output.relations.get(label, []))
    chunks = []
    for group in output.events.get(label, []):
        if group.args:
            body = SEGMENT_SEP.join(f"{role}{ROLE_SEP}{arg}" for role, arg in group.args)
            chunks.append(f"{group.trigger}{ROLE_SEP}{body}")
        else:
            chunks.append(group.trigger)
    return VALUE_SEP.join(chunks)


_EXPECTED_TYPE = {Task.NER: NerOutput, Task.RE: ReOutput, Task.EE: EeOutput}


def serialize(output: Output, schema: TaskSchema, mode: str = FULL) -> str:
    """Encode an output as the single-line JSON wire format.

    FULL keeps every schema label (empty string when absent); CONCISE drops
    empty ones. Labels follow schema order either way.
    """
    if mode not in (FULL, CONCISE):
        raise ValueError(f"mode must be {FULL!r} or {CONCISE!r}, got {mode!r}")
    expected = _EXPECTED_TYPE[schema.task]
    if not isinstance(output, expected):
        raise SchemaError(f"{type(output).__name__} does not fit a {schema.task.value} schema")
    keys = output.slots if isinstance(output, NerOutput) else (
        output.relations if isinstance(output, ReOutput) else output.events
    )
    unknown = set(keys) - schema.label_set
    if unknown:
        raise SchemaError(f"output has labels outside the schema: {sorted(unknown)}")
    entries = {}
    for label in schema.labels:
        value = _encode_value(output, label)
        if mode == CONCISE and not value:
            continue
        entries[label] = value
    return json.dumps(entries, ensure_ascii=False)


def grounding_strings(output: Output) -> list[str]:
    """Strings that must be source substrings: mentions, heads/tails, triggers, arguments."""
    out: list[str] = []
    if isinstance(output, NerOutput):
        for mentions in output.slots.values():
            out.extend(mentions)
    elif isinstance(output, ReOutput):
        for pairs in output.relations.values():
            for head, tail in pairs:
                out.extend((head, tail))
    else:
        for groups in output.events.values():
            for group in groups:
                out.append(group.trigger)
                out.extend(arg for _, arg in group.args)
    return out


def check_grounding(source_text: str, output: Output) -> list[str]:
    """Return extracted strings that are not substrings of the source text.

    Labels and role names are vocabulary, not extractions, so they are not
    checked. Comparison is case-sensitive on already-trimmed strings.
    """
    missing: list[str] = []
    seen: set[str] = set()
    for value in grounding_strings(output):
        if value not in source_text and value not in seen:
            seen.add(value)
            missing.append(value)
    return missing


def infer_schema(task: Task, *texts: str) -> TaskSchema:
    """Build a permissive schema from the keys present in the given generations.

    Convenience for one-off scoring without a schema file; labels appear in
    first-seen order, roles are left open.
    """
    labels: list[str] = []
    seen: set[str] = set()
    for text in texts:
        found = find_json_object(text)
        if found is None:
            continue
        for key, _ in found[0]:
            key = key.strip()
            if key and key not in seen:
                seen.add(key)
                labels.append(key)
    return TaskSchema(task=task, labels=tuple(labels) or ("item",))
