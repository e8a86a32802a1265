"""Structured extraction outputs in canonical form.

Every container normalizes at construction: strings are trimmed, empties
dropped, duplicates removed preserving first appearance. Parsing and
serialization round-trip exactly on these canonical values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


def dedupe(values: list[str]) -> list[str]:
    """Trim, drop empties, and deduplicate preserving first-appearance order."""
    seen: set[str] = set()
    out: list[str] = []
    for value in values:
        value = value.strip()
        if value and value not in seen:
            seen.add(value)
            out.append(value)
    return out


def _dedupe_pairs(pairs: list[tuple[str, str]]) -> list[tuple[str, str]]:
    seen: set[tuple[str, str]] = set()
    out: list[tuple[str, str]] = []
    for left, right in pairs:
        left, right = left.strip(), right.strip()
        if not left or not right:
            continue
        if (left, right) not in seen:
            seen.add((left, right))
            out.append((left, right))
    return out


@dataclass(frozen=True)
class NerOutput:
    """Entity slots: label -> ordered unique mentions."""

    slots: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", {label: dedupe(list(values)) for label, values in self.slots.items()})

    def is_empty(self) -> bool:
        return not any(self.slots.values())


@dataclass(frozen=True)
class ReOutput:
    """Relation pairs: relation type -> ordered unique (head, tail) pairs."""

    relations: dict[str, list[tuple[str, str]]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "relations", {label: _dedupe_pairs(list(pairs)) for label, pairs in self.relations.items()}
        )

    def is_empty(self) -> bool:
        return not any(self.relations.values())


@dataclass(frozen=True)
class TriggerGroup:
    """One event instance: a trigger plus its (role, argument) pairs.

    A group may carry zero pairs (a bare trigger); empty or duplicate pairs
    are dropped at construction.
    """

    trigger: str
    args: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "trigger", self.trigger.strip())
        object.__setattr__(self, "args", tuple(_dedupe_pairs(list(self.args))))

    @property
    def arg_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.args)


@dataclass(frozen=True)
class EeOutput:
    """Events: event type -> ordered trigger groups."""

    events: dict[str, list[TriggerGroup]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned: dict[str, list[TriggerGroup]] = {}
        for event_type, groups in self.events.items():
            kept: list[TriggerGroup] = []
            seen: set[tuple] = set()
            for group in groups:
                if not isinstance(group, TriggerGroup):
                    group = TriggerGroup(*group)
                key = (group.trigger, group.args)
                if group.trigger and key not in seen:
                    seen.add(key)
                    kept.append(group)
            cleaned[event_type] = kept
        object.__setattr__(self, "events", cleaned)

    def is_empty(self) -> bool:
        return not any(self.events.values())


Output = NerOutput | ReOutput | EeOutput


class ParseStatus(Enum):
    OK = "OK"
    RECOVERED = "RECOVERED"
    FAILED = "FAILED"


@dataclass(frozen=True)
class ParseIssue:
    """One diagnostic: where in the generation, and what was wrong."""

    position: str
    message: str

    def __str__(self) -> str:
        return f"{self.position}: {self.message}"


@dataclass(frozen=True)
class ParseReport:
    """Outcome of decoding one generation.

    OK: clean parse, no issues. RECOVERED: usable output assembled after
    dropping offending fragments (issues say which). FAILED: nothing usable;
    ``output`` is the task's empty structure and ``issues`` explain why.
    """

    output: Output
    status: ParseStatus
    issues: tuple[ParseIssue, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status is not ParseStatus.FAILED

    def diagnosis(self) -> str:
        return "; ".join(str(issue) for issue in self.issues) or "no issues"
