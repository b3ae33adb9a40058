"""Grasp, occlusion and placement predicates over world snapshots.

All of these are pure functions of a snapshot and return structured results
instead of raising, so the feasibility chains can turn them into verdicts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..geometry import Box, Pose, boxes_intersect, penetration_depth
from ..world.schema import GRASP_AXES
from ..world.state import (CONTAINER_WALL, PEN_TOL, SUPPORT_GAP, FLOOR_ID,
                           WorldState, XRobotSpec)

# Approach corridor length as a multiple of the gripper aperture.
APPROACH_FACTOR = 1.5

GRASP_AXIS_ORDER = ("FromTop", "AlongWidth", "AlongDepth")


@dataclass(frozen=True)
class GraspResult:
    ok: bool
    axis: str | None = None
    width: float | None = None          # extent the gripper must span
    reason: str | None = None           # "TooWide" | "OrientationBlocked"
    blocked_axis: str | None = None     # for OrientationBlocked
    min_width: float | None = None      # narrowest extent over allowed axes


def grasp_width(world: WorldState, object_id: str, axis: str) -> float:
    """Across-gripper extent for one grasp axis at the object's current yaw."""
    intr = world.intrinsic(object_id)
    w, d, _h = intr.size
    if axis == "AlongWidth":
        return w
    if axis == "AlongDepth":
        return d
    if axis == "FromTop":
        return min(w, d)
    raise ValueError(f"unknown grasp axis {axis!r}")


def _approach_corridors(box: Box, axis: str, aperture: float) -> list[Box]:
    """Free-space boxes the gripper must pass through for one grasp axis.

    Horizontal axes approach perpendicular to the measured dimension, from
    either side; FromTop approaches straight down through the column above.
    """
    length = APPROACH_FACTOR * aperture
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    if axis == "FromTop":
        return [Box(box.cx, box.cy, box.half_w, box.half_d, box.yaw,
                    box.z1, box.z1 + length)]
    if axis == "AlongWidth":
        # jaws span the width; approach along the local depth direction
        dx, dy = -s, c
        half_along, half_across = box.half_d, box.half_w
    else:  # AlongDepth
        dx, dy = c, s
        half_along, half_across = box.half_w, box.half_d
    out = []
    for sign in (1.0, -1.0):
        cx = box.cx + sign * dx * (half_along + length / 2.0)
        cy = box.cy + sign * dy * (half_along + length / 2.0)
        if axis == "AlongWidth":
            corridor = Box(cx, cy, half_across, length / 2.0, box.yaw,
                           box.z0, box.z1)
        else:
            corridor = Box(cx, cy, length / 2.0, half_across, box.yaw,
                           box.z0, box.z1)
        out.append(corridor)
    return out


def is_graspable(world: WorldState, object_id: str,
                 spec: XRobotSpec) -> GraspResult:
    """First grasp axis that fits the aperture with a clear approach.

    Axes are tried in the fixed order FromTop, AlongWidth, AlongDepth so the
    verdict is reproducible. Failure distinguishes nothing-fits (TooWide)
    from fits-but-blocked (OrientationBlocked).
    """
    intr = world.intrinsic(object_id)
    inst = world.object(object_id)
    box = Box.from_pose_size(inst.pose, intr.size)
    aperture = spec.gripper_aperture_max
    # ignore the object itself, everything stacked on it is handled by the
    # occlusion check, and its own contents ride inside it
    exclude = {object_id} | set(inst.contains)
    support = inst.supported_by
    if support is not None and support != FLOOR_ID:
        exclude.add(support)

    if not intr.graspable:
        return GraspResult(ok=False, reason="TooWide")

    fitting: list[tuple[str, float]] = []
    min_width = math.inf
    for axis in GRASP_AXIS_ORDER:
        if axis not in intr.grasp_axes:
            continue
        width = grasp_width(world, object_id, axis)
        min_width = min(min_width, width)
        if width <= aperture:
            fitting.append((axis, width))
    if not fitting:
        return GraspResult(ok=False, reason="TooWide",
                           min_width=None if math.isinf(min_width) else min_width)

    blocked_axis = None
    for axis, width in fitting:
        corridors = _approach_corridors(box, axis, aperture)
        for corridor in corridors:
            clear = True
            for sid, solid in world.solid_boxes(exclude=exclude):
                if penetration_depth(corridor, solid) > PEN_TOL:
                    clear = False
                    break
            if clear:
                return GraspResult(ok=True, axis=axis, width=width)
        blocked_axis = blocked_axis or axis
    return GraspResult(ok=False, reason="OrientationBlocked",
                       blocked_axis=blocked_axis)


@dataclass(frozen=True)
class OcclusionResult:
    clear: bool
    blockers: tuple[str, ...] = ()


def occlusion_check(world: WorldState, object_id: str,
                    include_drop_column: bool = True) -> OcclusionResult:
    """Objects that must move before this one can be picked or filled into.

    Two sources: anything whose support chain passes through the object
    (stacked on top), and, for containers used as placement targets, anything
    whose solid cuts the vertical drop column above the opening (disable via
    `include_drop_column` when testing pickability: lifting a container out
    from under an overhang is fine as long as nothing rests on it). Contents
    of the object itself do not count: they ride along when it moves.
    """
    contents: set[str] = set()
    frontier = list(world.object(object_id).contains)
    while frontier:
        cid = frontier.pop()
        if cid in contents or cid not in world.objects:
            continue
        contents.add(cid)
        frontier.extend(world.objects[cid].contains)

    blockers: list[str] = []
    for oid in sorted(world.objects):
        if oid == object_id or oid in contents:
            continue
        cur = world.objects[oid].supported_by
        seen = set()
        while cur is not None and cur in world.objects and cur not in seen:
            if cur == object_id:
                blockers.append(oid)
                break
            seen.add(cur)
            cur = world.objects[cur].supported_by

    intr = world.intrinsic(object_id)
    if intr.is_container and include_drop_column:
        box = world.object_box(object_id)
        opening = box.shrunk(CONTAINER_WALL)
        # column from the rim upward; anything solid in it blocks the drop
        column = Box(opening.cx, opening.cy, opening.half_w, opening.half_d,
                     opening.yaw, box.z1, box.z1 + 0.5)
        exclude = {object_id} | contents | set(blockers)
        for sid, solid in world.solid_boxes(exclude=exclude):
            if penetration_depth(column, solid) > PEN_TOL:
                blockers.append(sid)
    if blockers:
        return OcclusionResult(clear=False, blockers=tuple(sorted(set(blockers))))
    return OcclusionResult(clear=True)


@dataclass(frozen=True)
class PlacementResult:
    ok: bool
    collisions: tuple[str, ...] = ()
    unsupported: bool = False


def placement_check(world: WorldState, object_id: str,
                    target: Pose) -> PlacementResult:
    """Would the object rest collision-free at `target`?

    The object's current box is ignored (it is the thing moving); everything
    else must stay clear beyond the penetration tolerance, and the target must
    have support: the floor, a support surface, a stackable object, or a
    container interior.
    """
    if not all(math.isfinite(v) for v in (target.x, target.y, target.z, target.yaw)):
        raise ValueError("target pose must be finite")
    intr = world.intrinsic(object_id)
    inst = world.object(object_id)
    box = Box.from_pose_size(target, intr.size)
    exclude = {object_id} | set(inst.contains)
    hits = world.collision_ids(box, exclude=exclude)
    if hits:
        return PlacementResult(ok=False, collisions=tuple(sorted(hits)))
    support = world.resolve_support(object_id, pose=target)
    if support is None:
        return PlacementResult(ok=False, unsupported=True)
    return PlacementResult(ok=True)
