"""Task definitions and extraction schemas.

A schema fixes the contract between prompt, model output, and scorer: the
task kind, the ordered output labels (entity slots, relation types, or event
types), and for event extraction the role vocabulary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path


class Task(str, Enum):
    NER = "NER"
    RE = "RE"
    EE = "EE"

    @classmethod
    def parse(cls, value: str) -> "Task":
        try:
            return cls(value.strip().upper())
        except ValueError:
            raise SchemaError(f"unknown task {value!r}; expected one of NER, RE, EE") from None


class SchemaError(ValueError):
    """Raised for malformed schemas or schema/task mismatches."""


def _check_names(kind: str, names: tuple[str, ...]) -> None:
    seen = set()
    for name in names:
        if not isinstance(name, str) or not name.strip():
            raise SchemaError(f"{kind} entries must be non-empty strings, got {name!r}")
        if name != name.strip():
            raise SchemaError(f"{kind} {name!r} has surrounding whitespace")
        if name in seen:
            raise SchemaError(f"duplicate {kind} {name!r}")
        seen.add(name)


@dataclass(frozen=True)
class TaskSchema:
    """Ordered label set (and roles, for EE) that model outputs must follow.

    ``labels`` are entity slot names for NER, relation type names for RE and
    event type names for EE. ``roles`` is the argument role vocabulary and is
    only meaningful for EE; it may be empty, in which case role names in
    outputs are accepted verbatim.
    """

    task: Task
    labels: tuple[str, ...]
    roles: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "task", Task.parse(self.task) if isinstance(self.task, str) else self.task)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "roles", tuple(self.roles))
        if not self.labels:
            raise SchemaError("schema needs at least one label")
        _check_names("label", self.labels)
        _check_names("role", self.roles)
        if self.roles and self.task is not Task.EE:
            raise SchemaError(f"roles are only valid for EE schemas, not {self.task.value}")

    @property
    def label_set(self) -> frozenset[str]:
        return frozenset(self.labels)

    def to_dict(self) -> dict:
        out: dict = {"task": self.task.value, "labels": list(self.labels)}
        if self.task is Task.EE:
            out["roles"] = list(self.roles)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TaskSchema":
        if not isinstance(data, dict):
            raise SchemaError(f"schema must be an object, got {type(data).__name__}")
        unknown = set(data) - {"task", "labels", "roles"}
        if unknown:
            raise SchemaError(f"unknown schema fields: {sorted(unknown)}")
        if "task" not in data or "labels" not in data:
            raise SchemaError("schema requires 'task' and 'labels'")
        return cls(
            task=Task.parse(str(data["task"])),
            labels=tuple(data["labels"]),
            roles=tuple(data.get("roles") or ()),
        )

    @classmethod
    def load(cls, path: str | Path) -> "TaskSchema":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON: {exc}") from exc
        try:
            return cls.from_dict(data)
        except SchemaError as exc:
            raise SchemaError(f"{path}: {exc}") from exc

    def dump(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


@dataclass
class SchemaRegistry:
    """Named schema collection, typically loaded from a directory of *.json."""

    schemas: dict[str, TaskSchema] = field(default_factory=dict)

    @classmethod
    def load_dir(cls, path: str | Path) -> "SchemaRegistry":
        path = Path(path)
        if not path.is_dir():
            raise SchemaError(f"schema directory not found: {path}")
        schemas = {}
        for file in sorted(path.glob("*.json")):
            schemas[file.stem] = TaskSchema.load(file)
        if not schemas:
            raise SchemaError(f"no *.json schemas in {path}")
        return cls(schemas)

    def get(self, schema_id: str) -> TaskSchema:
        try:
            return self.schemas[schema_id]
        except KeyError:
            raise SchemaError(f"unknown schema {schema_id!r}") from None
