"""Keyframe timelines for plan previews.

The preview walks the plan kinematically (base motion along each step's path,
lift/arm dwell during manipulation) and emits (entity, pose, t) keyframes at a
fixed interval. Carried objects track the gripper, and every step ends with
exact keyframes matching the forward simulation, so the last frame of the
timeline agrees with the simulated end state field for field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import StalePlan
from ..geometry import Pose
from ..spatial.grid import RESOLUTION
from ..world.state import WorldState
from .plan import ActionPlan, PlanStep, simulate_step

PREVIEW_FRAME_INTERVAL = 0.1  # seconds between keyframes


@dataclass(frozen=True)
class Keyframe:
    t: float
    entity: str
    pose: Pose

    def to_dict(self) -> dict:
        return {"t": round(self.t, 6), "entity": self.entity,
                "pose": self.pose.to_dict()}


def _polyline(points: list[tuple[float, float]]) -> list[tuple[float, float, float]]:
    """(x, y, cumulative length) along a polyline."""
    out = []
    total = 0.0
    for i, (x, y) in enumerate(points):
        if i:
            px, py = points[i - 1]
            total += math.hypot(x - px, y - py)
        out.append((x, y, total))
    return out


def _sample_polyline(pts: list[tuple[float, float, float]],
                     s: float) -> tuple[float, float, float]:
    """Position and heading at arc length s."""
    if not pts:
        return 0.0, 0.0, 0.0
    s = max(0.0, min(s, pts[-1][2]))
    for i in range(1, len(pts)):
        x0, y0, s0 = pts[i - 1]
        x1, y1, s1 = pts[i]
        if s <= s1:
            if s1 - s0 < 1e-12:
                continue
            f = (s - s0) / (s1 - s0)
            return (x0 + f * (x1 - x0), y0 + f * (y1 - y0),
                    math.atan2(y1 - y0, x1 - x0))
    x, y, _ = pts[-1]
    return x, y, 0.0


def preview(world: WorldState, plan: ActionPlan) -> list[Keyframe]:
    """Timeline for a plan at the current revision. Mutates nothing."""
    if world.revision != plan.revision:
        raise StalePlan(f"plan at revision {plan.revision}, "
                        f"world at {world.revision}")
    spec = world.robot_specs[plan.robot_id]
    frames: list[Keyframe] = []
    t = 0.0
    sim = world
    carried: str | None = None

    def emit(entity: str, pose: Pose) -> None:
        frames.append(Keyframe(t=t, entity=entity, pose=pose))

    def emit_carried(x: float, y: float, z: float) -> None:
        if carried is not None and carried in sim.objects:
            emit(carried, Pose(x, y, z))

    for step in plan.steps:
        grid_points = []
        if step.base is not None:
            grid_points = [_cell_center(sim, spec, c) for c in step.base.path_cells]
        elif step.cells:
            grid_points = [_cell_center(sim, spec, c) for c in step.cells]

        if step.kind == "WaitForHuman":
            # previews assume the human helps immediately
            sim = simulate_step(sim, plan.robot_id, step)
            emit(plan.robot_id, sim.robot_states[plan.robot_id].base_pose)
            continue

        if grid_points:
            pts = _polyline(grid_points)
            length = pts[-1][2]
            duration = length / spec.nav_speed if spec.nav_speed > 0 else 0.0
            steps_n = int(duration / PREVIEW_FRAME_INTERVAL)
            lift = sim.robot_states[plan.robot_id].lift_z
            for i in range(1, steps_n + 1):
                t += PREVIEW_FRAME_INTERVAL
                s = min(i * PREVIEW_FRAME_INTERVAL * spec.nav_speed, length)
                x, y, yaw = _sample_polyline(pts, s)
                emit(plan.robot_id, Pose(x, y, 0.0, yaw))
                emit_carried(x, y, lift)
            t += max(duration - steps_n * PREVIEW_FRAME_INTERVAL, 0.0)

        if step.kind in ("Pick", "Place") and step.base is not None:
            state = sim.robot_states[plan.robot_id]
            dwell = (abs(step.base.lift_z - state.lift_z) / spec.lift_speed
                     + 2.0 * step.base.arm_ext / spec.arm_speed)
            t += dwell

        sim = simulate_step(sim, plan.robot_id, step)
        state = sim.robot_states[plan.robot_id]
        emit(plan.robot_id, state.base_pose)
        if step.kind == "Pick":
            carried = step.object_id
        elif step.kind == "Place":
            # exact end poses straight from the simulation
            placed = step.object_id
            if placed and placed in sim.objects:
                emit(placed, sim.objects[placed].pose)
                for child in sim.objects[placed].contains:
                    if child in sim.objects:
                        emit(child, sim.objects[child].pose)
            carried = None
    return frames


def _cell_center(world: WorldState, spec, cell: tuple[int, int]) -> tuple[float, float]:
    x0, y0 = world.bounds[0], world.bounds[1]
    return (x0 + (cell[0] + 0.5) * RESOLUTION, y0 + (cell[1] + 0.5) * RESOLUTION)
