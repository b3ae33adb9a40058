"""Plans: ordered primitive steps, their declared effects, and compilation.

A plan is compiled against a specific world revision. Each manipulation step
embeds a validated base-pose solution; navigation lives inside those steps as
the path the solver chose. Forward simulation applies every step's declared
effects to a copy of the world, which is what soundness checks, previews and
the noiseless executor all agree on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from ..errors import (ArmBlocked, HeightOutOfRangeError, NoFreeBase,
                      ParamKindMismatch, StalePlan, UnknownObject)
from ..geometry import Box, Pose, normalize_yaw, point_in_polygon
from ..feasibility.engine import (FeasibilityEngine, FLOOR_VACUUM, LevelTarget,
                                  PlacementTarget, AreaTarget, SpatialParam,
                                  grasp_point, param_from_dict, param_to_dict,
                                  pick_exemptions, _ChainFailure)
from ..spatial.basepose import BasePoseSolution, solve_base_pose
from ..spatial.grid import descend_path
from ..world.state import (FLOOR_ID, DetachSupport, Mutation, SetDoor, SetFill,
                           SetHolding, SetPose, SetRobotPose, WorldState,
                           XRobotSpec, apply_mutation, mutation_from_dict,
                           mutation_to_dict)

PROVENANCES = ("Direct", "Auto", "Alternative", "IgnoreOverride")


@dataclass(frozen=True)
class PlanStep:
    kind: str  # NavigateTo | Pick | Place | VacuumSweep | Fill | WaitForHuman
    object_id: str | None = None
    base: BasePoseSolution | None = None
    target_pose: Pose | None = None
    into: str | None = None
    cells: tuple[tuple[int, int], ...] = ()
    level: float | None = None
    prompt: str | None = None
    awaited: Mutation | None = None
    force: bool = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "object_id": self.object_id,
            "base": self.base.to_dict() if self.base else None,
            "target_pose": self.target_pose.to_dict() if self.target_pose else None,
            "into": self.into,
            "cells": [list(c) for c in self.cells],
            "level": self.level,
            "prompt": self.prompt,
            "awaited": mutation_to_dict(self.awaited) if self.awaited else None,
            "force": self.force,
        }


@dataclass(frozen=True)
class Instruction:
    object_id: str
    action: str
    param: SpatialParam

    def to_dict(self) -> dict:
        return {"object_id": self.object_id, "action": self.action,
                "param": param_to_dict(self.param)}


@dataclass(frozen=True)
class ActionPlan:
    plan_id: str
    robot_id: str
    steps: tuple[PlanStep, ...]
    provenance: str
    revision: int
    instruction: Instruction
    unresolved: dict | None = None  # FailureCondition dict for IgnoreOverride

    def to_dict(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "robot_id": self.robot_id,
            "steps": [s.to_dict() for s in self.steps],
            "provenance": self.provenance,
            "revision": self.revision,
            "instruction": self.instruction.to_dict(),
            "unresolved": self.unresolved,
        }


class PlanError(Exception):
    """Instruction cannot be compiled into a plan."""


# ---------------------------------------------------------------------------
# Step effects

def _container_content_moves(world: WorldState, container_id: str,
                             new_pose: Pose) -> list[Mutation]:
    """Rigid-transform contents along with their container."""
    container = world.object(container_id)
    old = container.pose
    dyaw = normalize_yaw(new_pose.yaw - old.yaw)
    c, s = math.cos(dyaw), math.sin(dyaw)
    moves: list[Mutation] = []
    for cid in container.contains:
        if cid not in world.objects:
            continue
        cp = world.objects[cid].pose
        rx, ry = cp.x - old.x, cp.y - old.y
        moves.append(SetPose(cid, Pose(
            new_pose.x + c * rx - s * ry,
            new_pose.y + s * rx + c * ry,
            cp.z + (new_pose.z - old.z),
            normalize_yaw(cp.yaw + dyaw),
        )))
        moves.extend(_container_content_moves(world, cid, moves[-1].pose)
                     if world.objects[cid].contains else [])
    return moves


def step_effects(world: WorldState, robot_id: str,
                 step: PlanStep) -> list[Mutation]:
    """World mutations a step applies at completion. Pure."""
    if step.kind == "NavigateTo":
        assert step.target_pose is not None
        return [SetRobotPose(robot_id, step.target_pose)]
    if step.kind == "Pick":
        assert step.object_id is not None and step.base is not None
        return [
            SetRobotPose(robot_id, step.base.base_pose,
                         lift_z=step.base.lift_z, arm_ext=0.0),
            SetHolding(robot_id, step.object_id),
            DetachSupport(step.object_id),
        ]
    if step.kind == "Place":
        assert step.object_id is not None and step.base is not None
        assert step.target_pose is not None
        out: list[Mutation] = [
            SetRobotPose(robot_id, step.base.base_pose,
                         lift_z=step.base.lift_z, arm_ext=0.0),
            SetPose(step.object_id, step.target_pose),
        ]
        out.extend(_container_content_moves(world, step.object_id,
                                            step.target_pose))
        out.append(SetHolding(robot_id, None))
        return out
    if step.kind == "VacuumSweep":
        if not step.cells:
            return []
        assert step.target_pose is not None
        return [SetRobotPose(robot_id, step.target_pose)]
    if step.kind == "Fill":
        assert step.object_id is not None and step.level is not None
        out = []
        if step.base is not None:
            out.append(SetRobotPose(robot_id, step.base.base_pose,
                                    lift_z=step.base.lift_z, arm_ext=0.0))
        out.append(SetFill(step.object_id, step.level))
        return out
    if step.kind == "WaitForHuman":
        return [step.awaited] if step.awaited is not None else []
    raise ValueError(f"unknown step kind {step.kind!r}")


def simulate_step(world: WorldState, robot_id: str,
                  step: PlanStep) -> WorldState:
    for mutation in step_effects(world, robot_id, step):
        world = apply_mutation(world, mutation)
    return world


def simulate_plan(world: WorldState, plan: ActionPlan,
                  check_revision: bool = True) -> WorldState:
    """Forward-simulate all steps; never touches the input world."""
    if check_revision and world.revision != plan.revision:
        raise StalePlan(f"plan built at revision {plan.revision}, "
                        f"world at {world.revision}")
    for step in plan.steps:
        world = simulate_step(world, plan.robot_id, step)
    return world


# ---------------------------------------------------------------------------
# Compilation

_plan_counter = 0


def _next_plan_id() -> str:
    global _plan_counter
    _plan_counter += 1
    return f"plan-{_plan_counter:04d}"


def _serpentine(cells: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Row-by-row sweep order, alternating direction per row."""
    rows: dict[int, list[int]] = {}
    for cx, cy in cells:
        rows.setdefault(cy, []).append(cx)
    out = []
    for i, cy in enumerate(sorted(rows)):
        xs = sorted(rows[cy], reverse=bool(i % 2))
        out.extend((cx, cy) for cx in xs)
    return out


class PlanCompiler:
    """Builds executable plans from instructions, sharing the engine's caches."""

    def __init__(self, engine: FeasibilityEngine):
        self.engine = engine

    # -- public -------------------------------------------------------------

    def compile(self, world: WorldState, instruction: Instruction,
                provenance: str = "Direct", force: bool = False,
                unresolved: dict | None = None,
                robot_id: str | None = None) -> ActionPlan:
        """Compile an instruction into steps for the first capable robot.

        With `force`, unsolvable manipulation steps are emitted anyway and
        flagged so the executor attempts (and fails, and logs) them.
        """
        spec = self._select_robot(world, instruction, robot_id)
        steps = self._steps_for(world, spec, instruction, force)
        return ActionPlan(
            plan_id=_next_plan_id(),
            robot_id=spec.id,
            steps=tuple(steps),
            provenance=provenance,
            revision=world.revision,
            instruction=instruction,
            unresolved=unresolved,
        )

    def _select_robot(self, world: WorldState, instruction: Instruction,
                      robot_id: str | None) -> XRobotSpec:
        if robot_id is not None:
            return world.robot_specs[robot_id]
        if instruction.object_id == FLOOR_ID:
            method = FLOOR_VACUUM
        else:
            inst = world.object(instruction.object_id)
            method = world.registry.find_method(inst.class_name,
                                                instruction.action)
            if method is None:
                raise PlanError(f"{inst.class_name} has no {instruction.action}")
        for rid, spec in world.robot_specs.items():
            if method.required_capabilities <= spec.capabilities:
                return spec
        raise PlanError(f"no robot capable of {instruction.action}")

    # -- step assembly --------------------------------------------------------

    def _steps_for(self, world: WorldState, spec: XRobotSpec,
                   instruction: Instruction, force: bool) -> list[PlanStep]:
        action = instruction.action
        param = instruction.param
        if instruction.object_id == FLOOR_ID:
            method = FLOOR_VACUUM
        else:
            method = world.registry.find_method(
                world.object(instruction.object_id).class_name, action)
            if method is None:
                raise PlanError(f"no such action {action}")

        if method.is_composite:
            steps: list[PlanStep] = []
            sim = world
            cls = world.object(instruction.object_id).class_name
            for sub_name in method.substeps:
                sub = world.registry.find_method(cls, sub_name)
                assert sub is not None
                sub_param = param if _param_matches(sub.spatial_param, param) else None
                sub_steps = self._primitive_steps(
                    sim, spec, Instruction(instruction.object_id, sub.name,
                                           sub_param), sub, force)
                for st in sub_steps:
                    sim = simulate_step(sim, spec.id, st)
                steps.extend(sub_steps)
            return steps
        return self._primitive_steps(world, spec, instruction, method, force)

    def _primitive_steps(self, world: WorldState, spec: XRobotSpec,
                         instruction: Instruction, method, force: bool
                         ) -> list[PlanStep]:
        if method.spatial_param == "AreaPolygon":
            return self._vacuum_steps(world, spec, instruction, force)
        if method.name == "Fill":
            return self._fill_steps(world, spec, instruction, force)
        if method.spatial_param == "PlacementPose":
            return self._move_steps(world, spec, instruction, force)
        # level/height fixture actions: drive within reach of the wand point
        base = self._solve(world, spec, grasp_point(world, instruction.object_id),
                           pick_exemptions(world, instruction.object_id), force)
        if base is None:
            return [PlanStep(kind="NavigateTo", object_id=instruction.object_id,
                             target_pose=None, force=True)]
        return [PlanStep(kind="NavigateTo",
                         target_pose=base.base_pose, base=base,
                         object_id=instruction.object_id)]

    def _solve(self, world: WorldState, spec: XRobotSpec,
               point: tuple[float, float, float], ignore: set[str],
               force: bool) -> BasePoseSolution | None:
        try:
            return solve_base_pose(world, spec, point, ignore_ids=ignore,
                                   cache=self.engine.cache)
        except (HeightOutOfRangeError, NoFreeBase, ArmBlocked):
            if force:
                return None
            raise

    def _move_steps(self, world: WorldState, spec: XRobotSpec,
                    instruction: Instruction, force: bool) -> list[PlanStep]:
        oid = instruction.object_id
        param = instruction.param
        pick_base = self._solve(world, spec, grasp_point(world, oid),
                                pick_exemptions(world, oid), force)
        steps = [PlanStep(kind="Pick", object_id=oid, base=pick_base,
                          force=pick_base is None)]
        if param is None or not isinstance(param, PlacementTarget):
            return steps
        if param.pose is None and param.into is None:
            return steps

        try:
            place_pose, container = self.engine.resolve_placement(world, oid, param)
        except _ChainFailure:
            if not force:
                raise PlanError("placement invalid")
            # attempt the raw pose anyway
            place_pose = param.pose or world.object(oid).pose
            container = param.into
        intr = world.intrinsic(oid)
        release = (place_pose.x, place_pose.y, place_pose.z + intr.size[2] / 2.0)
        ignore = {oid} | set(world.object(oid).contains)
        if container is not None:
            ignore.add(container)
        support = world.resolve_support(oid, pose=place_pose)
        if support is not None and support != FLOOR_ID:
            ignore.add(support)
        place_base = self._solve(world, spec, release, ignore, force)
        steps.append(PlanStep(kind="Place", object_id=oid, base=place_base,
                              target_pose=place_pose, into=container,
                              force=force or place_base is None))
        return steps

    def _fill_steps(self, world: WorldState, spec: XRobotSpec,
                    instruction: Instruction, force: bool) -> list[PlanStep]:
        oid = instruction.object_id
        level = instruction.param.level if isinstance(instruction.param,
                                                      LevelTarget) else 1.0
        pick_base = self._solve(world, spec, grasp_point(world, oid),
                                pick_exemptions(world, oid), force)
        dispenser = self.engine.find_dispenser(world)
        if dispenser is None and not force:
            raise PlanError("no dispenser in scene")
        dock = None
        if dispenser is not None:
            dock = self._solve(world, spec, grasp_point(world, dispenser),
                               pick_exemptions(world, dispenser), force)
        return [
            PlanStep(kind="Pick", object_id=oid, base=pick_base,
                     force=pick_base is None),
            PlanStep(kind="Fill", object_id=oid, level=level, base=dock,
                     force=dock is None),
        ]

    def _vacuum_steps(self, world: WorldState, spec: XRobotSpec,
                      instruction: Instruction, force: bool) -> list[PlanStep]:
        param = instruction.param
        if not isinstance(param, AreaTarget):
            raise PlanError("vacuum needs an area")
        polygon = list(param.polygon)

        def coverage(w: WorldState):
            grid = self.engine.cache.grid(w, spec)
            state = w.robot_states[spec.id]
            robot_cell = grid.cell_of(state.base_pose.x, state.base_pose.y)
            costs = self.engine.cache.costs(w, spec, robot_cell)
            area_cells = []
            for cy in range(grid.height):
                for cx in range(grid.width):
                    px, py = grid.center_of((cx, cy))
                    if point_in_polygon(px, py, polygon):
                        area_cells.append((cx, cy))
            coverable = [c for c in area_cells
                         if not grid.blocked[c[1], c[0]]
                         and math.isfinite(costs[c[1], c[0]])]
            return grid, costs, area_cells, coverable

        # first try the world as it stands; when closed doors keep part of
        # the area out of reach, replan with them open and front-load a wait
        # step per door the sweep actually needs
        opened: list[str] = []
        grid, costs, area_cells, coverable = coverage(world)
        if len(coverable) < len(area_cells) and any(not d.open for d in world.doors):
            sim = world
            for door in world.doors:
                if not door.open:
                    sim = apply_mutation(sim, SetDoor(door.id, True))
                    opened.append(door.id)
            grid, costs, area_cells, coverable = coverage(sim)
        if not coverable:
            if not force:
                raise PlanError("area not coverable")
            return [PlanStep(kind="VacuumSweep", cells=tuple(area_cells),
                             force=True)]

        entry = min(coverable, key=lambda c: (costs[c[1], c[0]], c[1], c[0]))
        path = descend_path(grid, costs, entry)
        order = _serpentine(coverable)
        last = order[-1]
        lx, ly = grid.center_of(last)

        steps: list[PlanStep] = []
        needed_doors = self._doors_on_route(world, grid, path + order, opened)
        for door_id in needed_doors:
            steps.append(PlanStep(
                kind="WaitForHuman",
                prompt=f"open door {door_id}",
                awaited=SetDoor(door_id, True),
            ))
        ex, ey = grid.center_of(entry)
        steps.append(PlanStep(kind="NavigateTo", target_pose=Pose(ex, ey, 0.0),
                              cells=tuple(path)))
        steps.append(PlanStep(kind="VacuumSweep", cells=tuple(order),
                              target_pose=Pose(lx, ly, 0.0)))
        return steps

    def _doors_on_route(self, world: WorldState, grid, cells: list[tuple[int, int]],
                        opened: list[str]) -> list[str]:
        needed = []
        for door_id in opened:
            door = world.door(door_id)
            span = door.span
            margin = grid.inflation_radius + grid.resolution
            for cx, cy in cells:
                px, py = grid.center_of((cx, cy))
                if span.footprint_contains(px, py, eps=margin):
                    needed.append(door_id)
                    break
        return needed


def _param_matches(kind: str, param: SpatialParam) -> bool:
    if param is None:
        return True
    if kind == "PlacementPose":
        return isinstance(param, PlacementTarget)
    if kind == "AreaPolygon":
        return isinstance(param, AreaTarget)
    if kind in ("ScalarLevel", "Height"):
        return isinstance(param, LevelTarget)
    return False
