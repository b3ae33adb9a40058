"""Base placement for grasping: where should the robot stand?

The kinematic model is a planar base, a prismatic lift, and a telescoping
horizontal arm, so the inverse kinematics per candidate base cell is closed
form: lift to the grasp height, extend by the horizontal distance, face the
point. Candidate cells are enumerated outward from the grasp point and the
cheapest navigable one wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ArmBlocked, HeightOutOfRangeError, NoFreeBase
from ..geometry import Box, Pose, penetration_depth, segment_swept_box
from ..world.state import PEN_TOL, WorldState, XRobotSpec
from .grid import OccupancyGrid, SpatialCache, descend_path, shared_cache

IK_TOLERANCE = 1e-6
ARM_CROSS_SECTION = 0.05
# lift-to-gripper offsets: the grasp point coincides with the gripper center
GRIPPER_OFFSET_LO = 0.0
GRIPPER_OFFSET_HI = 0.0


@dataclass(frozen=True)
class BasePoseSolution:
    base_pose: Pose
    lift_z: float
    arm_ext: float
    approach_yaw: float
    path_cells: tuple[tuple[int, int], ...]
    path_cost: float

    def gripper_point(self) -> tuple[float, float, float]:
        """Forward model: where the gripper center ends up."""
        return (self.base_pose.x + self.arm_ext * math.cos(self.approach_yaw),
                self.base_pose.y + self.arm_ext * math.sin(self.approach_yaw),
                self.lift_z)

    def to_dict(self) -> dict:
        return {
            "base_pose": self.base_pose.to_dict(),
            "lift_z": self.lift_z,
            "arm_ext": self.arm_ext,
            "approach_yaw": self.approach_yaw,
            "path_cost": self.path_cost,
        }


def arm_sweep_blockers(world: WorldState, base_xy: tuple[float, float],
                       grasp_point: tuple[float, float, float],
                       ignore: set[str]) -> list[str]:
    """Solids hit by the arm volume extending from base to grasp point."""
    gx, gy, gz = grasp_point
    sweep = segment_swept_box(base_xy[0], base_xy[1], gx, gy, gz,
                              ARM_CROSS_SECTION)
    hits = []
    reach = math.hypot(gx - base_xy[0], gy - base_xy[1]) + 1.0
    for sid, solid in world.solid_boxes(exclude=ignore):
        # cheap prefilter before the exact test
        if math.hypot(solid.cx - gx, solid.cy - gy) > reach + solid.bounding_radius():
            continue
        if penetration_depth(sweep, solid) > PEN_TOL:
            hits.append(sid)
    return hits


def solve_base_pose(world: WorldState, spec: XRobotSpec,
                    grasp_point: tuple[float, float, float],
                    ignore_ids: set[str] | None = None,
                    cache: SpatialCache | None = None) -> BasePoseSolution:
    """Pick the cheapest base cell from which the gripper attains the point.

    Raises HeightOutOfRangeError when the grasp height is outside the lift
    window, NoFreeBase when no free cell within arm reach is connected to the
    robot, and ArmBlocked when every connected candidate has the arm sweep
    colliding. Ties break on smaller arm extension, then on (y, x) cell order.
    """
    cache = cache or shared_cache
    ignore = set(ignore_ids or ())
    gx, gy, gz = grasp_point

    z_lo = spec.lift_range[0] + GRIPPER_OFFSET_LO
    z_hi = spec.lift_range[1] + GRIPPER_OFFSET_HI
    if not (z_lo - 1e-9 <= gz <= z_hi + 1e-9):
        raise HeightOutOfRangeError(gz, z_lo, z_hi)

    grid = cache.grid(world, spec)
    state = world.robot_states[spec.id]
    robot_cell = grid.cell_of(state.base_pose.x, state.base_pose.y)
    costs = cache.costs(world, spec, robot_cell)

    # candidate cells: all centers within arm reach of the grasp point
    reach = spec.arm_extension_max
    cx0, cy0 = grid.cell_of(gx, gy)
    r_cells = int(math.ceil(reach / grid.resolution)) + 1
    candidates: list[tuple[float, float, int, int]] = []
    any_free_connected = False
    for cy in range(max(cy0 - r_cells, 0), min(cy0 + r_cells + 1, grid.height)):
        for cx in range(max(cx0 - r_cells, 0), min(cx0 + r_cells + 1, grid.width)):
            px, py = grid.center_of((cx, cy))
            dist = math.hypot(px - gx, py - gy)
            if dist > reach + 1e-9:
                continue
            cost = costs[cy, cx]
            if not math.isfinite(cost):
                continue
            any_free_connected = True
            candidates.append((cost, dist, cx, cy))
    if not any_free_connected:
        raise NoFreeBase(f"no free connected base within {reach} m of "
                         f"({gx:.2f}, {gy:.2f})")

    candidates.sort(key=lambda c: (c[0], c[1], c[3], c[2]))
    blockers: list[str] = []
    for cost, dist, cx, cy in candidates:
        px, py = grid.center_of((cx, cy))
        hits = arm_sweep_blockers(world, (px, py), grasp_point, ignore)
        if hits:
            blockers.extend(h for h in hits if h not in blockers)
            continue
        yaw = math.atan2(gy - py, gx - px) if dist > 1e-12 else 0.0
        path_cells = tuple(descend_path(grid, costs, (cx, cy)))
        solution = BasePoseSolution(
            base_pose=Pose(px, py, 0.0, yaw),
            lift_z=gz,
            arm_ext=dist,
            approach_yaw=yaw,
            path_cells=path_cells,
            path_cost=cost,
        )
        fx, fy, fz = solution.gripper_point()
        assert math.hypot(fx - gx, fy - gy) + abs(fz - gz) <= IK_TOLERANCE
        return solution
    raise ArmBlocked(sorted(blockers))
