from __future__ import annotations

import pytest

from toolplan.benchmark import (
    TASK_KEYS,
    VARIANTS,
    fixture_file,
    load_benchmark_task,
    load_classifier_fixtures,
    load_gold,
    load_key_concept_set,
    load_sim_config,
    resolve_fixture_root,
)
from toolplan.harness import FAILURE_CLASSES
from toolplan.llm import load_transcript
from toolplan.pipeline import METHODS
from toolplan.scene import TASK_IDS
from toolplan.sim import SimConfig


@pytest.mark.parametrize("key", TASK_KEYS)
def test_gold_names_real_objects(key):
    scene = load_benchmark_task(key).scene
    gold = load_gold(key)
    names = {o.name for o in scene.objects}
    assert gold.task == key
    assert gold.target in names
    assert gold.oracle_tool_set <= names
    # easy variants keep the candidate tools even though the oracle skips them
    assert gold.oracle_tool_set or not gold.oracle_uses_tool
    assert len(gold.parameters) == len(gold.plan_shape)


@pytest.mark.parametrize("key", TASK_KEYS)
def test_every_task_has_a_fixture_per_method(golden_root, key):
    # discriminative variants only ever run the full method
    for method in (METHODS if key in TASK_IDS else ["full"]):
        tr = load_transcript(fixture_file(golden_root, key, method))
        stages = [s for s in tr.stages() if s != "coder"]
        assert set(stages) <= set(METHODS[method].stages())
        assert tr.stages()[-1] == "coder"


def test_variants_point_at_shipped_tasks():
    for family, variants in VARIANTS.items():
        for key in variants.values():
            assert load_benchmark_task(key).id == family


@pytest.mark.parametrize("task_id", TASK_IDS)
def test_key_concept_sets(task_id):
    data = load_key_concept_set(task_id)
    assert data["task"] == task_id
    assert len(data["outputs"]) == 10
    assert 0 <= data["planted_correct"] <= 10


def test_classifier_fixtures_are_labelled():
    fixtures = load_classifier_fixtures()
    assert len(fixtures) == 9
    for f in fixtures:
        assert f["task"] in TASK_KEYS
        assert f["expected"] in FAILURE_CLASSES[1:4]


def test_shipped_sim_config_matches_the_defaults():
    assert load_sim_config() == SimConfig()
    with pytest.raises(ValueError, match="unknown simulator config"):
        SimConfig.from_dict({"gravity": 9.8})


def test_fixture_root_resolution(tmp_path):
    assert resolve_fixture_root("golden").name == "golden"
    assert resolve_fixture_root(tmp_path) == tmp_path
    with pytest.raises(FileNotFoundError):
        resolve_fixture_root("platinum")
