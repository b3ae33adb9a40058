"""Failure conditions: the closed set of reasons an instruction can fail.

Every variant declares its payload fields so explanations can interpolate
them and property tests can fuzz every constructor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

# variant name -> ordered payload field names
VARIANT_FIELDS: dict[str, tuple[str, ...]] = {
    "NoCapableRobot": ("action",),
    "NoSuchAffordance": ("action", "class_name"),
    "TooHeavy": ("weight", "payload"),
    "GripperTooNarrow": ("width", "aperture"),
    "OrientationBlocked": ("axis",),
    "OccludedPick": ("blockers",),
    "HeightOutOfRange": ("z", "z_max"),
    "NoNavigablePath": ("to",),
    "PlacementUnreachable": ("pose",),
    "PlacementCollision": ("ids",),
    "PlacementUnsupported": (),
    "AreaObstructed": ("ids",),
    "AreaUnreachable": ("cells",),
    "ExecutionError": ("step", "detail"),
}


@dataclass(frozen=True)
class FailureCondition:
    variant: str
    data: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.variant not in VARIANT_FIELDS:
            raise ValueError(f"unknown failure variant {self.variant!r}")
        expected = set(VARIANT_FIELDS[self.variant])
        got = set(self.data)
        if expected != got:
            raise ValueError(
                f"{self.variant}: expected fields {sorted(expected)}, got {sorted(got)}")

    def to_dict(self) -> dict:
        return {"variant": self.variant, "data": _plain(self.data)}

    @staticmethod
    def from_dict(d: dict) -> "FailureCondition":
        return FailureCondition(d["variant"], dict(d.get("data", {})))


def _plain(value: Any) -> Any:
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float):
        return round(value, 9)
    return value


def no_capable_robot(action: str) -> FailureCondition:
    return FailureCondition("NoCapableRobot", {"action": action})


def no_such_affordance(action: str, class_name: str) -> FailureCondition:
    return FailureCondition("NoSuchAffordance",
                            {"action": action, "class_name": class_name})


def too_heavy(weight: float, payload: float) -> FailureCondition:
    return FailureCondition("TooHeavy", {"weight": weight, "payload": payload})


def gripper_too_narrow(width: float | None, aperture: float) -> FailureCondition:
    return FailureCondition("GripperTooNarrow",
                            {"width": width, "aperture": aperture})


def orientation_blocked(axis: str | None) -> FailureCondition:
    return FailureCondition("OrientationBlocked", {"axis": axis})


def occluded_pick(blockers: list[str]) -> FailureCondition:
    return FailureCondition("OccludedPick", {"blockers": sorted(blockers)})


def height_out_of_range(z: float, z_max: float) -> FailureCondition:
    return FailureCondition("HeightOutOfRange", {"z": z, "z_max": z_max})


def no_navigable_path(to: str) -> FailureCondition:
    return FailureCondition("NoNavigablePath", {"to": to})


def placement_unreachable(pose) -> FailureCondition:
    return FailureCondition("PlacementUnreachable", {"pose": pose})


def placement_collision(ids: list[str]) -> FailureCondition:
    return FailureCondition("PlacementCollision", {"ids": sorted(ids)})


def placement_unsupported() -> FailureCondition:
    return FailureCondition("PlacementUnsupported", {})


def area_obstructed(ids: list[str]) -> FailureCondition:
    return FailureCondition("AreaObstructed", {"ids": sorted(ids)})


def area_unreachable(cells: list[tuple[int, int]]) -> FailureCondition:
    return FailureCondition("AreaUnreachable",
                            {"cells": [list(c) for c in cells]})


def execution_error(step: int, detail: str) -> FailureCondition:
    return FailureCondition("ExecutionError", {"step": step, "detail": detail})
