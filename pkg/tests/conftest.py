"""Shared fixtures: canonical scenes and builders for synthetic worlds."""

from __future__ import annotations

import json
import os

import pytest

from affordkit.world import load_scene, load_scene_file

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENES = os.path.join(REPO_ROOT, "scenes")
SCENARIOS = os.path.join(REPO_ROOT, "scenarios")


def scene_path(name: str) -> str:
    return os.path.join(SCENES, name)


def scenario_path(name: str) -> str:
    return os.path.join(SCENARIOS, name)


MOVER_SPEC = {
    "id": "mover",
    "capabilities": ["navigate", "pick", "place", "dispense-fill"],
    "payload_max": 1.5,
    "gripper_aperture_max": 0.12,
    "lift_range": [0.0, 1.1],
    "arm_extension_max": 0.52,
    "base_footprint_radius": 0.17,
    "nav_speed": 0.5,
    "lift_speed": 0.2,
    "arm_speed": 0.2,
}

BASE_CLASSES = [
    {
        "class_name": "Mug",
        "intrinsic": {"size": [0.08, 0.08, 0.1], "weight": 0.3,
                      "stackable": True, "fillable": True},
        "methods": [
            {"name": "Move", "spatial_param": "PlacementPose"},
            {"name": "Stack", "spatial_param": "PlacementPose"},
            {"name": "Fill", "spatial_param": "ScalarLevel"},
        ],
    },
    {
        "class_name": "Box",
        "intrinsic": {"size": [0.08, 0.2, 0.1], "weight": 0.5, "stackable": True},
        "methods": [{"name": "Move", "spatial_param": "PlacementPose"}],
    },
]


def build_scene(objects=None, statics=None, doors=None, classes=None,
                robots=None, bounds=(0.0, 0.0, 4.0, 4.0)):
    """Assemble and load a scene document from parts."""
    doc = {
        "format": 1,
        "bounds": list(bounds),
        "classes": classes if classes is not None else BASE_CLASSES,
        "static": statics or [],
        "doors": doors or [],
        "objects": objects or [],
        "robots": robots or [
            {"spec": MOVER_SPEC, "state": {"base_pose": {"x": 0.6, "y": 0.6}}}
        ],
    }
    return load_scene(json.dumps(doc))


@pytest.fixture
def table_scene():
    """A table with a mug on it in an open room."""
    return build_scene(
        statics=[{"id": "table", "center": [2.0, 2.0], "size": [1.0, 0.6],
                  "z": [0.0, 0.7], "support_surface": True}],
        objects=[{"id": "mug1", "class": "Mug",
                  "pose": {"x": 2.0, "y": 2.0, "z": 0.7}}],
    )


@pytest.fixture
def fig1_world():
    return load_scene_file(scene_path("fig1_shelf.json"))


@pytest.fixture
def fig6_world():
    return load_scene_file(scene_path("fig6_basket.json"))


@pytest.fixture
def part1_world():
    return load_scene_file(scene_path("study_part1.json"))


@pytest.fixture
def vacuum_world():
    return load_scene_file(scene_path("part2_vacuum.json"))
