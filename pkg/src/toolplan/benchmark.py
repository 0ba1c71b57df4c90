"""Shipped benchmark data: task files, gold annotations, fixtures, simulator config.

Task keys are ``<id>`` for the six benchmark tasks and ``<id>:<variant>`` for
the extra discriminative variants.  On disk the colon becomes an underscore.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .scene import TASK_IDS, TaskSpec, load_task, task_from_dict
from .sim.config import SimConfig

#: discriminative families: variant name -> task key
VARIANTS = {
    "sofa-traversing": {"large-gap": "sofa-traversing", "small-gap": "sofa-traversing:small-gap"},
    "sofa-climbing": {"high-sofa": "sofa-climbing", "low-sofa": "sofa-climbing:low-sofa"},
}
TASK_KEYS = TASK_IDS + ("sofa-traversing:small-gap", "sofa-climbing:low-sofa")


def data_dir() -> Path:
    return Path(str(resources.files("toolplan").joinpath("data")))


def slug(key: str) -> str:
    return key.replace(":", "_")


def load_benchmark_task(key: str) -> TaskSpec:
    if key not in TASK_KEYS:
        raise KeyError(f"unknown task {key!r}; choose from {', '.join(TASK_KEYS)}")
    return load_task(data_dir() / "tasks" / f"{slug(key)}.json")


def load_sim_config() -> SimConfig:
    return SimConfig.load(data_dir() / "sim_config.json")


def fixture_file(root: str | Path, key: str, method: str) -> Path:
    return Path(root) / slug(key) / f"{method}.json"


def resolve_fixture_root(name_or_path: str | Path) -> Path:
    """A shipped fixture set name (e.g. ``golden``) or a directory path."""
    p = Path(name_or_path)
    if p.is_dir():
        return p
    shipped = data_dir() / "fixtures" / str(name_or_path).strip("/")
    if shipped.is_dir():
        return shipped
    raise FileNotFoundError(f"fixture directory not found: {name_or_path}")


@dataclass(frozen=True)
class KeyConceptGold:
    name: str
    value: float
    unit: str
    constraint: str
    aliases: tuple[str, ...] = ()
    tolerance: float = 0.02
    constraint_keywords: tuple[str, ...] = ()

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("gold value must be finite")


@dataclass(frozen=True)
class GoldAnnotation:
    task: str
    target: str
    key_concept: KeyConceptGold
    oracle_tool_set: frozenset[str]
    oracle_uses_tool: bool
    parameter_tolerance: float = 0.02
    ordering: tuple[str, ...] = ()
    plan_shape: tuple[str, ...] = ()
    parameters: tuple[tuple[float, float, float] | None, ...] = ()
    notes: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, d: dict) -> "GoldAnnotation":
        k = d["key_concept"]
        return cls(
            task=d["task"],
            target=d["target"],
            key_concept=KeyConceptGold(
                k["name"], float(k["value"]), k["unit"], k["constraint"], tuple(k.get("aliases", ())),
                float(k.get("tolerance", d.get("parameter_tolerance", 0.02))),
                tuple(k.get("constraint_keywords", ())),
            ),
            oracle_tool_set=frozenset(d["oracle_tool_set"]),
            oracle_uses_tool=bool(d["oracle_uses_tool"]),
            parameter_tolerance=float(d.get("parameter_tolerance", 0.02)),
            ordering=tuple(d.get("ordering", ())),
            plan_shape=tuple(d.get("plan_shape", ())),
            parameters=tuple(tuple(p) if p is not None else None for p in d.get("parameters", ())),
        )

    def to_dict(self) -> dict:
        k = self.key_concept
        return {
            "task": self.task,
            "target": self.target,
            "key_concept": {
                "name": k.name, "aliases": list(k.aliases), "value": k.value, "unit": k.unit,
                "tolerance": k.tolerance, "constraint": k.constraint,
                "constraint_keywords": list(k.constraint_keywords),
            },
            "oracle_tool_set": sorted(self.oracle_tool_set),
            "oracle_uses_tool": self.oracle_uses_tool,
            "parameter_tolerance": self.parameter_tolerance,
            "ordering": list(self.ordering),
            "plan_shape": list(self.plan_shape),
            "parameters": [list(p) if p is not None else None for p in self.parameters],
        }


def load_gold(key: str) -> GoldAnnotation:
    path = data_dir() / "gold" / f"{slug(key)}.json"
    if not path.exists():
        raise KeyError(f"no gold annotation for {key!r}")
    return GoldAnnotation.from_dict(json.loads(path.read_text(encoding="utf-8")))


def load_key_concept_set(task_id: str) -> dict:
    """Ten stored Analyzer replies for ``task_id`` plus the planted correct count."""
    path = data_dir() / "key_concepts" / f"{task_id}.json"
    return json.loads(path.read_text(encoding="utf-8"))


def load_classifier_fixtures() -> list[dict]:
    path = data_dir() / "classifier"
    return [json.loads(p.read_text(encoding="utf-8")) for p in sorted(path.glob("*.json"))]


def task_from_json(text: str) -> TaskSpec:
    return task_from_dict(json.loads(text))
