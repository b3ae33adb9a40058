"""Decision-tree verdicts, menus, explanations, signifier hit tests."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from affordkit.errors import ParamKindMismatch, UnknownObject
from affordkit.feasibility import (AreaTarget, FeasibilityEngine, LevelTarget,
                                   PlacementTarget, TAG_MAX_LEN,
                                   VARIANT_FIELDS, FailureCondition,
                                   ExplanationCatalog, conditions, explain,
                                   signifier_hit)
from affordkit.geometry import Pose
from affordkit.world import SetPose, apply_mutation

from conftest import MOVER_SPEC, build_scene


@pytest.fixture
def engine():
    return FeasibilityEngine()


# -- move chain ------------------------------------------------------------------

def test_feasible_move_brute_force_confirms(engine, table_scene):
    """Every chain node re-checked directly for the passing case."""
    world = table_scene
    spec = world.robot_specs["mover"]
    target = Pose(2.3, 2.0, 0.7)
    verdict = engine.evaluate(world, "mug1", "Move", PlacementTarget(pose=target))
    assert verdict.feasible and verdict.checked_robot == "mover"

    from affordkit.spatial import (is_graspable, occlusion_check,
                                   placement_check, solve_base_pose)
    assert world.effective_weight("mug1") <= spec.payload_max
    assert is_graspable(world, "mug1", spec).ok
    assert occlusion_check(world, "mug1", include_drop_column=False).clear
    solve_base_pose(world, spec, (2.0, 2.0, 0.75),
                    ignore_ids={"mug1", "table"})
    assert placement_check(world, "mug1", target).ok
    solve_base_pose(world, spec, (2.3, 2.0, 0.75),
                    ignore_ids={"mug1", "table"})


def test_too_heavy_verdict(engine):
    classes = [{"class_name": "Anvil",
                "intrinsic": {"size": [0.1, 0.1, 0.1], "weight": 30.0},
                "methods": [{"name": "Move", "spatial_param": "PlacementPose"}]}]
    world = build_scene(classes=classes,
                        objects=[{"id": "a", "class": "Anvil",
                                  "pose": {"x": 2, "y": 2, "z": 0}}])
    verdict = engine.evaluate(world, "a", "Move", None)
    assert not verdict.feasible
    condition = verdict.explanation.condition
    assert condition.variant == "TooHeavy"
    assert condition.data == {"weight": 30.0, "payload": 1.5}
    assert verdict.explanation.tag == "Too heavy"


def test_no_such_affordance(engine, table_scene):
    verdict = engine.evaluate(table_scene, "mug1", "Teleport", None)
    assert not verdict.feasible
    assert verdict.explanation.condition.variant == "NoSuchAffordance"


def test_no_capable_robot(engine):
    spec = dict(MOVER_SPEC, capabilities=["navigate"])
    world = build_scene(robots=[{"spec": spec,
                                 "state": {"base_pose": {"x": 1, "y": 1}}}],
                        objects=[{"id": "m", "class": "Mug",
                                  "pose": {"x": 2, "y": 2, "z": 0}}])
    verdict = engine.evaluate(world, "m", "Move", None)
    assert verdict.explanation.condition.variant == "NoCapableRobot"


def test_unknown_object_and_param_mismatch(engine, table_scene):
    with pytest.raises(UnknownObject):
        engine.evaluate(table_scene, "ghost", "Move", None)
    with pytest.raises(ParamKindMismatch):
        engine.evaluate(table_scene, "mug1", "Move", LevelTarget(0.5))
    with pytest.raises(ParamKindMismatch):
        engine.evaluate(table_scene, "mug1", "Fill", LevelTarget(1.5))


def test_multi_robot_deepest_failure_wins(engine):
    """The robot that progresses furthest defines the surfaced condition."""
    weak = dict(MOVER_SPEC, id="weak", payload_max=0.1)
    narrow = dict(MOVER_SPEC, id="narrow", gripper_aperture_max=0.05)
    world = build_scene(
        robots=[{"spec": weak, "state": {"base_pose": {"x": 0.6, "y": 0.6}}},
                {"spec": narrow, "state": {"base_pose": {"x": 0.6, "y": 1.2}}}],
        objects=[{"id": "m", "class": "Mug", "pose": {"x": 2, "y": 2, "z": 0}}])
    verdict = engine.evaluate(world, "m", "Move", None)
    # weak fails at weight (depth 1); narrow fails at grasp (depth 2)
    assert verdict.explanation.condition.variant == "GripperTooNarrow"
    assert verdict.checked_robot == "narrow"


def test_first_passing_robot_wins(engine):
    second = dict(MOVER_SPEC, id="second")
    world = build_scene(
        robots=[{"spec": MOVER_SPEC, "state": {"base_pose": {"x": 0.6, "y": 0.6}}},
                {"spec": second, "state": {"base_pose": {"x": 3.4, "y": 3.4}}}],
        objects=[{"id": "m", "class": "Mug", "pose": {"x": 2, "y": 2, "z": 0}}])
    verdict = engine.evaluate(world, "m", "Move", None)
    assert verdict.feasible and verdict.checked_robot == "mover"


def test_drag_into_container_binds_and_reports_occlusion(engine, fig6_world):
    verdict = engine.evaluate(fig6_world, "blocks", "Move",
                              PlacementTarget(pose=Pose(3.3, 3.0, 0.12)))
    assert not verdict.feasible
    condition = verdict.explanation.condition
    assert condition.variant == "PlacementCollision"
    assert condition.data["ids"] == ["shelf_lip"]


def test_vacuum_chain_on_fixture(engine, vacuum_world):
    area = AreaTarget(((3.8, 1.4), (5.4, 1.4), (5.4, 2.9), (3.8, 2.9)))
    verdict = engine.evaluate(vacuum_world, "floor", "Vacuum", area)
    assert verdict.explanation.condition.variant == "AreaObstructed"
    assert verdict.explanation.condition.data["ids"] == ["book_a", "book_b"]

    cleared = apply_mutation(vacuum_world,
                             SetPose("book_a", Pose(4.2, 3.5, 0.0)))
    cleared = apply_mutation(cleared, SetPose("book_b", Pose(4.6, 3.5, 0.0)))
    verdict = engine.evaluate(cleared, "floor", "Vacuum", area)
    assert verdict.explanation.condition.variant == "AreaUnreachable"
    assert len(verdict.explanation.condition.data["cells"]) > 0

    from affordkit.world import SetDoor
    opened = apply_mutation(cleared, SetDoor("door1", True))
    verdict = engine.evaluate(opened, "floor", "Vacuum", area)
    assert verdict.feasible


def test_vacuum_area_left_of_door_feasible(engine, vacuum_world):
    area = AreaTarget(((0.8, 0.8), (2.2, 0.8), (2.2, 2.0), (0.8, 2.0)))
    verdict = engine.evaluate(vacuum_world, "floor", "Vacuum", area)
    assert verdict.feasible
    assert verdict.checked_robot == "sweeper"


def test_composite_forward_simulation(engine):
    """A two-step composite fails when the first step's effects break the
    second, and passes otherwise."""
    classes = [{
        "class_name": "Crate",
        "intrinsic": {"size": [0.08, 0.08, 0.1], "weight": 0.4,
                      "stackable": True},
        "methods": [
            {"name": "Move", "spatial_param": "PlacementPose"},
            {"name": "MoveTwice", "spatial_param": "PlacementPose",
             "substeps": ["Move", "Move"]},
        ]}]
    world = build_scene(classes=classes, objects=[
        {"id": "c", "class": "Crate", "pose": {"x": 2, "y": 2, "z": 0}}])
    verdict = engine.evaluate(world, "c", "MoveTwice",
                              PlacementTarget(pose=Pose(2.5, 2.0, 0.0)))
    assert verdict.feasible


# -- menus -----------------------------------------------------------------------

def test_menu_absent_grayed_available(engine):
    classes = [
        {"class_name": "Sphere",
         "intrinsic": {"size": [0.06, 0.06, 0.06], "weight": 0.2,
                       "stackable": False},
         "methods": [{"name": "Move", "spatial_param": "PlacementPose"},
                     {"name": "Fetch", "spatial_param": "PlacementPose",
                      "substeps": ["Move"]}]},
        {"class_name": "Mug",
         "intrinsic": {"size": [0.08, 0.08, 0.1], "weight": 0.3,
                       "stackable": True, "fillable": True},
         "methods": [{"name": "Move", "spatial_param": "PlacementPose"},
                     {"name": "Stack", "spatial_param": "PlacementPose"},
                     {"name": "Fill", "spatial_param": "ScalarLevel"}]},
        {"class_name": "Machine",
         "intrinsic": {"size": [0.4, 0.3, 0.6], "weight": 30.0,
                       "graspable": False},
         "methods": [{"name": "Dispense", "spatial_param": "None",
                      "required_capabilities": ["dispense-fill"]}]},
    ]
    world = build_scene(classes=classes, objects=[
        {"id": "ball", "class": "Sphere", "pose": {"x": 1.0, "y": 2.0, "z": 0}},
        {"id": "cup", "class": "Mug", "pose": {"x": 2.0, "y": 2.0, "z": 0}},
        {"id": "top", "class": "Sphere", "pose": {"x": 2.0, "y": 2.0, "z": 0.1}},
        {"id": "soda", "class": "Machine", "pose": {"x": 3.0, "y": 3.0, "z": 0}},
    ])
    # Stack never appears for spheres (not in the class)
    ball_menu = {e.action.name: e for e in engine.action_menu(world, "ball")}
    assert "Stack" not in ball_menu
    assert ball_menu["Move"].state == "Available"

    # Fetch appears grayed out for an obstructed graspable object
    cup_menu = {e.action.name: e for e in engine.action_menu(world, "cup")}
    assert cup_menu["Move"].state == "GrayedOut"
    expl = cup_menu["Move"].explanation
    assert expl.condition.variant == "OccludedPick"
    assert "top" in expl.condition.data["blockers"]

    # clear mug: everything available
    world2 = apply_mutation(world, SetPose("top", Pose(1.5, 3.0, 0.0)))
    cup_menu2 = {e.action.name: e for e in engine.action_menu(world2, "cup")}
    assert [cup_menu2[n].state for n in ("Move", "Stack", "Fill")] == \
        ["Available"] * 3


def test_menu_matches_evaluate(engine, fig1_world):
    for oid in fig1_world.objects:
        for entry in engine.action_menu(fig1_world, oid):
            verdict = engine.evaluate(fig1_world, oid, entry.action.name, None)
            assert (entry.state == "Available") == verdict.feasible


# -- signifier -------------------------------------------------------------------

def test_signifier_rays(engine, table_scene):
    world = table_scene
    assert signifier_hit(world, (2.0, 2.0, 3.0), (0, 0, -1)) == "mug1"
    assert signifier_hit(world, (0.2, 0.2, 1.0), (0, 0, -1)) is None
    with pytest.raises(ValueError):
        signifier_hit(world, (0, 0, 0), (0, 0, 0))


def test_signifier_nearest_of_stack():
    world = build_scene(objects=[
        {"id": "low", "class": "Box", "pose": {"x": 2, "y": 2, "z": 0}},
        {"id": "high", "class": "Mug", "pose": {"x": 2, "y": 2, "z": 0.1}},
    ])
    assert signifier_hit(world, (2.0, 2.0, 2.0), (0, 0, -1)) == "high"
    # sideways ray at the lower box's height sees the lower one
    assert signifier_hit(world, (0.0, 2.0, 0.05), (1, 0, 0)) == "low"


def test_signifier_walls_occlude():
    world = build_scene(
        statics=[{"id": "wall", "center": [1.0, 2.0], "size": [0.1, 2.0],
                  "z": [0, 2]}],
        objects=[{"id": "m", "class": "Mug", "pose": {"x": 2, "y": 2, "z": 0}}])
    assert signifier_hit(world, (0.0, 2.0, 0.05), (1, 0, 0)) is None
    # from the other side the mug is visible
    assert signifier_hit(world, (3.5, 2.0, 0.05), (-1, 0, 0)) == "m"


def test_signifier_ignores_methodless_objects():
    classes = [{"class_name": "Prop",
                "intrinsic": {"size": [0.1, 0.1, 0.3], "weight": 1.0,
                              "graspable": False},
                "methods": []}] + [
        {"class_name": "Mug",
         "intrinsic": {"size": [0.08, 0.08, 0.1], "weight": 0.3},
         "methods": [{"name": "Move", "spatial_param": "PlacementPose"}]}]
    world = build_scene(classes=classes, objects=[
        {"id": "plant", "class": "Prop", "pose": {"x": 1.5, "y": 2, "z": 0}},
        {"id": "m", "class": "Mug", "pose": {"x": 2.5, "y": 2, "z": 0}},
    ])
    assert signifier_hit(world, (0.0, 2.0, 0.05), (1, 0, 0)) == "m"


# -- explanations ------------------------------------------------------------------

def test_paper_tag_for_height():
    explanation = explain(conditions.height_out_of_range(1.6, 1.1))
    assert explanation.tag == "Too high to reach"
    assert "1.6" in explanation.tooltip and "1.1" in explanation.tooltip


def test_blockers_appear_in_tooltip():
    explanation = explain(conditions.area_obstructed(["book1", "book2"]))
    assert "book1" in explanation.tooltip and "book2" in explanation.tooltip


def test_catalog_file_overrides(tmp_path):
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps([{
        "condition_variant": "TooHeavy",
        "tag": "Beyond my strength",
        "tooltip_template": "It weighs {weight} kg."
    }]))
    catalog = ExplanationCatalog.from_file(str(path))
    assert catalog.explain(conditions.too_heavy(3.0, 1.5)).tag == \
        "Beyond my strength"
    # untouched variants keep their defaults
    assert catalog.explain(conditions.height_out_of_range(2, 1)).tag == \
        "Too high to reach"


def test_unknown_variant_falls_back():
    catalog = ExplanationCatalog(records=[])
    explanation = catalog.explain(conditions.too_heavy(3.0, 1.5))
    assert explanation.tag.startswith("Cannot:")
    assert len(explanation.tag) <= TAG_MAX_LEN


_VALUE_STRATEGIES = {
    "action": st.text(min_size=1, max_size=20),
    "class_name": st.text(min_size=1, max_size=20),
    "weight": st.floats(0, 1e6, allow_nan=False),
    "payload": st.floats(0, 1e6, allow_nan=False),
    "width": st.one_of(st.none(), st.floats(0, 10, allow_nan=False)),
    "aperture": st.floats(0, 10, allow_nan=False),
    "axis": st.one_of(st.none(), st.sampled_from(["FromTop", "AlongWidth",
                                                  "AlongDepth"])),
    "blockers": st.lists(st.text(min_size=1, max_size=8), max_size=5),
    "z": st.floats(-10, 10, allow_nan=False),
    "z_max": st.floats(-10, 10, allow_nan=False),
    "to": st.text(min_size=1, max_size=12),
    "pose": st.builds(Pose, st.floats(-9, 9, allow_nan=False),
                      st.floats(-9, 9, allow_nan=False)),
    "ids": st.lists(st.text(min_size=1, max_size=8), max_size=5),
    "cells": st.lists(st.tuples(st.integers(0, 200), st.integers(0, 200)),
                      max_size=30),
    "step": st.integers(0, 50),
    "detail": st.text(max_size=60),
}


@st.composite
def any_condition(draw):
    variant = draw(st.sampled_from(sorted(VARIANT_FIELDS)))
    data = {f: draw(_VALUE_STRATEGIES[f]) for f in VARIANT_FIELDS[variant]}
    return FailureCondition(variant, data)


@given(any_condition())
@settings(max_examples=300, deadline=None)
def test_explanation_totality(condition):
    explanation = explain(condition)
    assert explanation.tag
    assert len(explanation.tag) <= TAG_MAX_LEN
    assert isinstance(explanation.tooltip, str)
    # serializes cleanly
    json.dumps(explanation.to_dict())


# -- determinism --------------------------------------------------------------------

def test_verdict_serialization_deterministic(engine, fig1_world):
    target = PlacementTarget(pose=Pose(2.0, 3.5, 0.4))
    blobs = set()
    for _ in range(3):
        fresh = FeasibilityEngine()
        verdict = fresh.evaluate(fig1_world, "book", "Move", target)
        blobs.add(json.dumps(verdict.to_dict(), sort_keys=True))
    assert len(blobs) == 1
