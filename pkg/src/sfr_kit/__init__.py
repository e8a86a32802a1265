"""Rewards, metrics, and data tools for schema-constrained extraction training."""

__version__ = "0.1.0"

from .codec import (
    CONCISE,
    FULL,
    check_grounding,
    infer_schema,
    parse,
    parse_ee,
    parse_ner,
    parse_re,
    serialize,
)
from .config import ConfigError, DEFAULT_CONFIG, EeWeights, NerWeights, ReWeights, SfrConfig
from .evaluation import (
    BucketStats,
    EvalRecord,
    LengthBuckets,
    MetricReport,
    argument_f1,
    exact_accuracy,
    length_buckets,
    micro_f1,
    trigger_f1,
)
from .grpo import (
    ADVANTAGE_EPSILON,
    CandidateGroup,
    Phase,
    PhasePlan,
    default_phase_plan,
    group_advantages,
    score_group,
)
from .outputs import (
    EeOutput,
    NerOutput,
    ParseIssue,
    ParseReport,
    ParseStatus,
    ReOutput,
    TriggerGroup,
)
from .pipeline import (
    DataError,
    DatasetPool,
    PoolItem,
    TargetParseError,
    allocate_largest_remainder,
    mix_pools,
    render_prompt,
    sample_streamlined_subset,
    streamline,
    streamline_pool,
)
from .rewards import (
    GoldUnparseableError,
    GroupAlignment,
    GroupMatch,
    RewardBreakdown,
    align_trigger_groups,
    coverage,
    ee_penalty,
    jaccard_distance,
    reward_ee,
    reward_ner,
    reward_re,
    reward_units,
    score,
    set_f1,
    sym_diff_ratio,
)
from .schema import SchemaError, SchemaRegistry, Task, TaskSchema
from .units import (
    ArgumentGroup,
    EeUnits,
    NerUnits,
    ReUnits,
    empty_units,
    extract_units,
)

__all__ = [
    "ADVANTAGE_EPSILON",
    "ArgumentGroup",
    "BucketStats",
    "CONCISE",
    "CandidateGroup",
    "ConfigError",
    "DEFAULT_CONFIG",
    "DataError",
    "DatasetPool",
    "EeOutput",
    "EeUnits",
    "EeWeights",
    "EvalRecord",
    "FULL",
    "GoldUnparseableError",
    "GroupAlignment",
    "GroupMatch",
    "LengthBuckets",
    "MetricReport",
    "NerOutput",
    "NerUnits",
    "NerWeights",
    "ParseIssue",
    "ParseReport",
    "ParseStatus",
    "Phase",
    "PhasePlan",
    "PoolItem",
    "ReOutput",
    "ReUnits",
    "ReWeights",
    "RewardBreakdown",
    "SchemaError",
    "SchemaRegistry",
    "SfrConfig",
    "Task",
    "TaskSchema",
    "TargetParseError",
    "TriggerGroup",
    "align_trigger_groups",
    "allocate_largest_remainder",
    "argument_f1",
    "check_grounding",
    "coverage",
    "default_phase_plan",
    "ee_penalty",
    "empty_units",
    "exact_accuracy",
    "extract_units",
    "group_advantages",
    "infer_schema",
    "jaccard_distance",
    "length_buckets",
    "micro_f1",
    "mix_pools",
    "parse",
    "parse_ee",
    "parse_ner",
    "parse_re",
    "render_prompt",
    "reward_ee",
    "reward_ner",
    "reward_re",
    "reward_units",
    "sample_streamlined_subset",
    "score",
    "score_group",
    "serialize",
    "set_f1",
    "streamline",
    "streamline_pool",
    "sym_diff_ratio",
    "trigger_f1",
]
