"""Group-relative candidate scoring and the training phase plan.

Rewards for the K rollouts of one example are normalized within the group:
advantage = (r - mean) / (population std + epsilon). A zero-variance group
gets a zero advantage vector rather than amplified noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .config import DEFAULT_CONFIG, SfrConfig
from .rewards import RewardBreakdown, score
from .schema import Task, TaskSchema

ADVANTAGE_EPSILON = 1e-8


def group_advantages(rewards: list[float], epsilon: float = ADVANTAGE_EPSILON) -> list[float]:
    """Mean-center and std-scale a reward group; constant groups map to zeros."""
    if not rewards:
        raise ValueError("advantage normalization needs at least one reward")
    if max(rewards) == min(rewards):
        return [0.0] * len(rewards)
    mean = math.fsum(rewards) / len(rewards)
    variance = math.fsum((r - mean) ** 2 for r in rewards) / len(rewards)
    scale = math.sqrt(variance) + epsilon
    return [(r - mean) / scale for r in rewards]


@dataclass(frozen=True)
class CandidateGroup:
    """One example's gold plus its K sampled candidates, with scores once filled."""

    example_id: str
    task: Task
    gold: str
    candidates: tuple[str, ...]
    rewards: tuple[float, ...] | None = None
    advantages: tuple[float, ...] | None = None
    breakdowns: tuple[RewardBreakdown, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError("candidate group needs at least one candidate")
        for name in ("rewards", "advantages", "breakdowns"):
            value = getattr(self, name)
            if value is not None:
                value = tuple(value)
                object.__setattr__(self, name, value)
                if len(value) != len(self.candidates):
                    raise ValueError(f"{name} length {len(value)} != candidate count {len(self.candidates)}")


def score_group(
    group: CandidateGroup,
    schema: TaskSchema,
    config: SfrConfig = DEFAULT_CONFIG,
    epsilon: float = ADVANTAGE_EPSILON,
) -> CandidateGroup:
    """Score every candidate against the group's gold and attach advantages.

    Candidate order is preserved. An unparseable gold propagates as
    GoldUnparseableError.
    """
    if schema.task is not group.task:
        raise ValueError(f"group task {group.task.value} != schema task {schema.task.value}")
    breakdowns = tuple(score(group.gold, candidate, schema, config) for candidate in group.candidates)
    rewards = tuple(b.total for b in breakdowns)
    advantages = tuple(group_advantages(list(rewards), epsilon))
    return replace(group, rewards=rewards, advantages=advantages, breakdowns=breakdowns)


@dataclass(frozen=True)
class Phase:
    """One curriculum stage: task, sampled instance budget, rollouts, epochs."""

    task: Task
    instances: int
    rollout_k: int
    epochs: int

    def __post_init__(self) -> None:
        if self.instances < 0:
            raise ValueError("instances must be non-negative")
        if self.rollout_k < 1 or self.epochs < 1:
            raise ValueError("rollout_k and epochs must be at least 1")


_TASK_ORDER = {Task.NER: 0, Task.RE: 1, Task.EE: 2}


@dataclass(frozen=True)
class PhasePlan:
    """Easy-to-hard curriculum; phases must progress NER -> RE -> EE."""

    phases: tuple[Phase, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "phases", tuple(self.phases))
        if not self.phases:
            raise ValueError("phase plan needs at least one phase")
        ranks = [_TASK_ORDER[phase.task] for phase in self.phases]
        if ranks != sorted(ranks):
            raise ValueError("phases must follow the NER, RE, EE task order")

    def to_dict(self) -> dict:
        return {
            "phases": [
                {
                    "task": phase.task.value,
                    "instances": phase.instances,
                    "rollout_k": phase.rollout_k,
                    "epochs": phase.epochs,
                }
                for phase in self.phases
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PhasePlan":
        phases = tuple(
            Phase(
                task=Task.parse(str(entry["task"])),
                instances=int(entry["instances"]),
                rollout_k=int(entry["rollout_k"]),
                epochs=int(entry["epochs"]),
            )
            for entry in data["phases"]
        )
        return cls(phases)


def default_phase_plan() -> PhasePlan:
    """The reference three-stage curriculum used for training."""
    return PhasePlan(
        phases=(
            Phase(Task.NER, instances=80_000, rollout_k=4, epochs=2),
            Phase(Task.RE, instances=50_000, rollout_k=8, epochs=3),
            Phase(Task.EE, instances=9_991, rollout_k=8, epochs=3),
        )
    )
