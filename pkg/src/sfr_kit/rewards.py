"""Stepwise fine-grained rewards over structural unit sets.

Each task reward blends a coarse coverage term (did the right labels show
up), fine-grained set F1 on the task's payload units raised to a stretching
exponent, and mismatch penalties. All set primitives guard empty golds with
max(1, .), so the both-empty edges are: coverage 0, symmetric-difference
ratio 0, Jaccard distance 1, and F1 equal to the configured
``f1_empty_empty`` value.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codec import parse
from .config import DEFAULT_CONFIG, SfrConfig
from .outputs import ParseReport
from .schema import Task, TaskSchema
from .units import EeUnits, NerUnits, ReUnits, Units, extract_units


class GoldUnparseableError(ValueError):
    """Gold reference text failed to parse; scoring against it is meaningless."""

    def __init__(self, message: str, record_ids: tuple[str, ...] = ()):
        super().__init__(message)
        self.record_ids = record_ids


def coverage(gold: frozenset, pred: frozenset) -> float:
    """Fraction of gold units present in the prediction."""
    return len(gold & pred) / max(1, len(gold))


def set_f1(gold: frozenset, pred: frozenset, empty_value: float = 1.0) -> float:
    """Set-level F1; ``empty_value`` decides the both-empty case."""
    if not gold and not pred:
        return empty_value
    return 2 * len(gold & pred) / (len(gold) + len(pred))


def sym_diff_ratio(gold: frozenset, pred: frozenset) -> float:
    """Symmetric difference size relative to the gold size."""
    return len(gold ^ pred) / max(1, len(gold))


def jaccard_distance(gold: frozenset, pred: frozenset) -> float:
    """1 - Jaccard similarity; note the guard makes the both-empty distance 1."""
    return 1.0 - len(gold & pred) / max(1, len(gold | pred))


@dataclass(frozen=True)
class RewardBreakdown:
    """Final reward plus its ingredients.

    ``components`` holds raw quantities and signed ``term_*`` entries; the
    term entries sum to the pre-clip total. ``clipped`` is True only when
    clipping actually changed the value.
    """

    task: Task
    total: float
    components: dict[str, float]
    clipped: bool = False

    @property
    def unclipped_total(self) -> float:
        return sum(value for name, value in self.components.items() if name.startswith("term_"))

    def to_dict(self) -> dict:
        return {
            "task": self.task.value,
            "total": self.total,
            "clipped": self.clipped,
            "components": dict(self.components),
        }


def _finalize(task: Task, components: dict[str, float], config: SfrConfig) -> RewardBreakdown:
    raw = sum(value for name, value in components.items() if name.startswith("term_"))
    if config.clip_to_unit:
        total = min(1.0, max(0.0, raw))
        return RewardBreakdown(task, total, components, clipped=total != raw)
    return RewardBreakdown(task, raw, components)


def reward_ner(gold: NerUnits, pred: NerUnits, config: SfrConfig = DEFAULT_CONFIG) -> RewardBreakdown:
    """Type coverage plus stretched mention-pair F1, minus mismatch ratios."""
    w = config.ner
    type_coverage = coverage(gold.types, pred.types)
    pair_f1 = set_f1(gold.pairs, pred.pairs, config.f1_empty_empty)
    pair_f1_stretched = pair_f1 ** w.gamma
    type_mismatch = sym_diff_ratio(gold.types, pred.types)
    pair_mismatch = sym_diff_ratio(gold.pairs, pred.pairs)
    components = {
        "type_coverage": type_coverage,
        "pair_f1": pair_f1,
        "pair_f1_stretched": pair_f1_stretched,
        "type_mismatch": type_mismatch,
        "pair_mismatch": pair_mismatch,
        "term_type_coverage": w.w_t * type_coverage,
        "term_pair_f1": w.w_p * pair_f1_stretched,
        "term_type_mismatch": -w.lambda_t * type_mismatch,
        "term_pair_mismatch": -w.lambda_p * pair_mismatch,
    }
    return _finalize(Task.NER, components, config)


def reward_re(gold: ReUnits, pred: ReUnits, config: SfrConfig = DEFAULT_CONFIG) -> RewardBreakdown:
    """Type coverage, head/tail partial-credit F1, stretched triple F1, minus distances."""
    w = config.re
    empty = config.f1_empty_empty
    type_coverage = coverage(gold.types, pred.types)
    head_f1 = set_f1(gold.heads, pred.heads, empty)
    tail_f1 = set_f1(gold.tails, pred.tails, empty)
    triple_f1 = set_f1(gold.triples, pred.triples, empty)
    triple_f1_stretched = triple_f1 ** w.gamma
    type_distance = jaccard_distance(gold.types, pred.types)
    triple_distance = jaccard_distance(gold.triples, pred.triples)
    components = {
        "type_coverage": type_coverage,
        "head_f1": head_f1,
        "tail_f1": tail_f1,
        "triple_f1": triple_f1,
        "triple_f1_stretched": triple_f1_stretched,
        "type_distance": type_distance,
        "triple_distance": triple_distance,
        "term_type_coverage": w.w_t * type_coverage,
        "term_head_f1": w.w_h * head_f1,
        "term_tail_f1": w.w_a * tail_f1,
        "term_triple_f1": w.w_r * triple_f1_stretched,
        "term_type_distance": -w.lambda_t * type_distance,
        "term_triple_distance": -w.lambda_r * triple_distance,
    }
    return _finalize(Task.RE, components, config)


@dataclass(frozen=True)
class GroupMatch:
    gold_index: int
    pred_index: int
    overlap: int


@dataclass(frozen=True)
class GroupAlignment:
    """Greedy gold/pred trigger-group matching and the pooled argument F1."""

    matches: tuple[GroupMatch, ...]
    tp: int
    fp: int
    fn: int
    f_full: float
    unmatched_gold: tuple[int, ...]
    unmatched_pred: tuple[int, ...]


def align_trigger_groups(gold: EeUnits, pred: EeUnits) -> GroupAlignment:
    """Match trigger groups within each event type by descending pair overlap.

    Ties break toward the lowest gold index, then the lowest pred index. A
    match needs at least one shared (role, argument) pair. F1 over the pooled
    matched pairs is defined as 1 when nothing is expected and nothing was
    produced (tp = fp = fn = 0).
    """
    matches: list[GroupMatch] = []
    used_gold: set[int] = set()
    used_pred: set[int] = set()
    event_types = sorted(
        {group.event_type for group in gold.groups} | {group.event_type for group in pred.groups}
    )
    for event_type in event_types:
        gold_ids = [i for i, group in enumerate(gold.groups) if group.event_type == event_type]
        pred_ids = [j for j, group in enumerate(pred.groups) if group.event_type == event_type]
        while True:
            best: tuple[int, int, int] | None = None
            for i in gold_ids:
                if i in used_gold:
                    continue
                for j in pred_ids:
                    if j in used_pred:
                        continue
                    overlap = len(gold.groups[i].pairs & pred.groups[j].pairs)
                    if overlap >= 1 and (best is None or overlap > best[0]):
                        best = (overlap, i, j)
            if best is None:
                break
            overlap, i, j = best
            used_gold.add(i)
            used_pred.add(j)
            matches.append(GroupMatch(i, j, overlap))
    tp = sum(match.overlap for match in matches)
    fn = sum(len(group.pairs) for group in gold.groups) - tp
    fp = sum(len(group.pairs) for group in pred.groups) - tp
    f_full = 1.0 if tp == fp == fn == 0 else 2 * tp / (2 * tp + fp + fn)
    return GroupAlignment(
        matches=tuple(matches),
        tp=tp,
        fp=fp,
        fn=fn,
        f_full=f_full,
        unmatched_gold=tuple(i for i in range(len(gold.groups)) if i not in used_gold),
        unmatched_pred=tuple(j for j in range(len(pred.groups)) if j not in used_pred),
    )


def ee_penalty(gold: EeUnits, pred: EeUnits, f_full: float, config: SfrConfig = DEFAULT_CONFIG) -> tuple[float, str]:
    """Hierarchical EE penalty: event-type error dominates, then triggers, then arguments.

    Returns (penalty, branch) with branch one of "events", "triggers",
    "arguments"; exactly one level is charged.
    """
    w = config.ee
    event_mismatch = sym_diff_ratio(gold.event_types, pred.event_types)
    if event_mismatch > 0:
        return w.lambda_E * event_mismatch, "events"
    trigger_mismatch = sym_diff_ratio(gold.triggers, pred.triggers)
    if trigger_mismatch > 0:
        return w.lambda_T * trigger_mismatch, "triggers"
    return w.lambda_F * (1.0 - f_full), "arguments"


def reward_ee(gold: EeUnits, pred: EeUnits, config: SfrConfig = DEFAULT_CONFIG) -> RewardBreakdown:
    """Event/trigger coverage plus stretched group-argument F1, minus the hierarchical penalty."""
    w = config.ee
    alignment = align_trigger_groups(gold, pred)
    event_coverage = coverage(gold.event_types, pred.event_types)
    trigger_coverage = coverage(gold.triggers, pred.triggers)
    argument_f1_stretched = alignment.f_full ** w.gamma
    penalty, branch = ee_penalty(gold, pred, alignment.f_full, config)
    components = {
        "event_coverage": event_coverage,
        "trigger_coverage": trigger_coverage,
        "argument_f1": alignment.f_full,
        "argument_f1_stretched": argument_f1_stretched,
        "event_mismatch": sym_diff_ratio(gold.event_types, pred.event_types),
        "trigger_mismatch": sym_diff_ratio(gold.triggers, pred.triggers),
        "event_penalty": penalty if branch == "events" else 0.0,
        "trigger_penalty": penalty if branch == "triggers" else 0.0,
        "argument_penalty": penalty if branch == "arguments" else 0.0,
        "term_event_coverage": w.w_E * event_coverage,
        "term_trigger_coverage": w.w_T * trigger_coverage,
        "term_argument_f1": w.w_F * argument_f1_stretched,
        "term_penalty": -penalty,
    }
    return _finalize(Task.EE, components, config)


def reward_units(task: Task, gold: Units, pred: Units, config: SfrConfig = DEFAULT_CONFIG) -> RewardBreakdown:
    """Dispatch to the task reward over already-extracted unit sets."""
    if task is Task.NER:
        return reward_ner(gold, pred, config)
    if task is Task.RE:
        return reward_re(gold, pred, config)
    return reward_ee(gold, pred, config)


def score(
    gold_text: str, pred_text: str, schema: TaskSchema, config: SfrConfig = DEFAULT_CONFIG
) -> RewardBreakdown:
    """Score one generation against one gold reference.

    Both texts are parsed leniently. A prediction that fails to parse scores
    against empty units (so degenerate generations get the empty-output
    reward instead of crashing training); an unparseable gold raises, since
    that is a data defect.
    """
    gold_report = parse(gold_text, schema)
    if not gold_report.ok:
        raise GoldUnparseableError(f"gold does not parse: {gold_report.diagnosis()}")
    pred_report: ParseReport = parse(pred_text, schema)
    gold_units = extract_units(gold_report.output)
    pred_units = extract_units(pred_report.output)
    return reward_units(schema.task, gold_units, pred_units, config)
