"""Structural unit sets used by rewards and metrics.

Each task reduces an output to small hashable units: label-level sets that
track coarse structure, and fine-grained sets (mention pairs, relation
triples, trigger groups) that the stepwise reward weighs separately.
"""

from __future__ import annotations

from dataclasses import dataclass

from .outputs import EeOutput, NerOutput, Output, ReOutput
from .schema import Task


@dataclass(frozen=True)
class NerUnits:
    types: frozenset[str]
    pairs: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class ReUnits:
    types: frozenset[str]
    triples: frozenset[tuple[str, str, str]]
    heads: frozenset[tuple[str, str]]
    tails: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class ArgumentGroup:
    """One event instance flattened for matching: its (role, argument) set."""

    event_type: str
    trigger: str
    pairs: frozenset[tuple[str, str]]


@dataclass(frozen=True)
class EeUnits:
    event_types: frozenset[str]
    triggers: frozenset[tuple[str, str]]
    groups: tuple[ArgumentGroup, ...]

    def argument_triples(self) -> frozenset[tuple[str, str, str]]:
        """Pooled (event type, role, argument) set across all groups."""
        return frozenset(
            (group.event_type, role, arg) for group in self.groups for role, arg in group.pairs
        )


Units = NerUnits | ReUnits | EeUnits


def ner_units(output: NerOutput) -> NerUnits:
    pairs = {(label, mention) for label, mentions in output.slots.items() for mention in mentions}
    return NerUnits(types=frozenset(label for label, _ in pairs), pairs=frozenset(pairs))


def re_units(output: ReOutput) -> ReUnits:
    triples = {
        (label, head, tail) for label, pairs in output.relations.items() for head, tail in pairs
    }
    return ReUnits(
        types=frozenset(label for label, _, _ in triples),
        triples=frozenset(triples),
        heads=frozenset((label, head) for label, head, _ in triples),
        tails=frozenset((label, tail) for label, _, tail in triples),
    )


def ee_units(output: EeOutput) -> EeUnits:
    groups = tuple(
        ArgumentGroup(event_type, group.trigger, group.arg_set)
        for event_type, event_groups in output.events.items()
        for group in event_groups
    )
    return EeUnits(
        event_types=frozenset(group.event_type for group in groups),
        triggers=frozenset((group.event_type, group.trigger) for group in groups),
        groups=groups,
    )


def extract_units(output: Output) -> Units:
    """Reduce an output to its unit sets.

    Label-level sets come from non-empty entries only, so FULL and CONCISE
    renderings of the same content yield identical units.
    """
    if isinstance(output, NerOutput):
        return ner_units(output)
    if isinstance(output, ReOutput):
        return re_units(output)
    return ee_units(output)


def empty_units(task: Task) -> Units:
    if task is Task.NER:
        return NerUnits(frozenset(), frozenset())
    if task is Task.RE:
        return ReUnits(frozenset(), frozenset(), frozenset(), frozenset())
    return EeUnits(frozenset(), frozenset(), ())
