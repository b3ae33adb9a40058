"""Mixed-initiative resolutions: Auto, Alternative, Ignore.

Auto relocates other objects until the original instruction passes, leaving
the instruction itself untouched. Alternative swaps in a same-class object or
a nearby pose. Ignore compiles the instruction anyway and lets the executor
fail honestly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..feasibility.conditions import FailureCondition
from ..feasibility.engine import (FeasibilityEngine, LevelTarget,
                                  PlacementTarget, SpatialParam)
from ..geometry import Pose
from ..spatial.grid import RESOLUTION
from ..world.state import FLOOR_ID, WorldState
from .plan import (ActionPlan, Instruction, PlanCompiler, PlanError,
                   simulate_plan, simulate_step)

K_AUTO = 3          # max blocker relocations in an Auto plan
R_ALT = 0.5         # max radius for alternative-pose sampling (m)
R_PARK = 1.2        # max radius for parking-pose sampling (m)


@dataclass(frozen=True)
class Alternative:
    kind: str  # "SameClassObject" | "AlternativePose"
    object_id: str | None
    pose: Pose | None
    plan: ActionPlan

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "object_id": self.object_id,
            "pose": self.pose.to_dict() if self.pose else None,
            "plan": self.plan.to_dict(),
        }


@dataclass(frozen=True)
class ResolutionOffer:
    auto: ActionPlan | None
    alternative: Alternative | None
    ignore_available: bool = True

    def to_dict(self) -> dict:
        return {
            "auto": self.auto.to_dict() if self.auto else None,
            "alternative": self.alternative.to_dict() if self.alternative else None,
            "ignore_available": self.ignore_available,
        }


def _failure_object_ids(world: WorldState,
                        failed: FailureCondition) -> list[str]:
    """Movable objects named by the failure condition."""
    ids: list[str] = []
    if failed.variant in ("OccludedPick", "PlacementCollision", "AreaObstructed"):
        key = "blockers" if failed.variant == "OccludedPick" else "ids"
        ids = [i for i in failed.data.get(key, []) if i in world.objects]
    return sorted(set(ids))


class Resolver:
    def __init__(self, engine: FeasibilityEngine):
        self.engine = engine
        self.compiler = PlanCompiler(engine)

    # -- Auto -----------------------------------------------------------------

    def auto_resolve(self, world: WorldState, instruction: Instruction,
                     failed: FailureCondition) -> ActionPlan | None:
        """Breadth-first search over blocker relocations, depth <= K_AUTO.

        Returns the plan with the fewest relocations (ties by summed path
        cost) or None when nothing within depth makes the instruction pass.
        """
        # (sim world, [(blocker, original pose, parking pose)], verdict)
        def judged(sim, relocations):
            verdict = self.engine.evaluate(
                sim, instruction.object_id, instruction.action,
                instruction.param)
            return (sim, relocations, verdict)

        frontier = [judged(world, [])]
        for _depth in range(K_AUTO + 1):
            successes = []
            for sim, relocations, verdict in frontier:
                if verdict.feasible and relocations:
                    plan = self._assemble_auto_plan(world, instruction,
                                                    relocations)
                    if plan is not None:
                        successes.append(plan)
            if successes:
                return min(successes,
                           key=lambda p: (len(p.steps), _plan_cost(p)))
            next_frontier = []
            for sim, relocations, verdict in frontier:
                if verdict.feasible:
                    continue
                condition = verdict.explanation.condition
                candidates = _failure_object_ids(sim, condition)
                if isinstance(instruction.param, PlacementTarget) and \
                        instruction.param.into in sim.objects and \
                        condition.variant in ("PlacementCollision", "OccludedPick"):
                    # a blocked container drop can be fixed by moving the
                    # container itself out into the open
                    if instruction.param.into not in candidates:
                        candidates.append(instruction.param.into)
                moved_already = {r[0] for r in relocations}
                for blocker in candidates:
                    if blocker in moved_already or \
                            blocker == instruction.object_id:
                        continue
                    parked = self._find_parking(sim, instruction, blocker)
                    if parked is None:
                        continue
                    original = sim.object(blocker).pose
                    new_sim = self._simulate_move(sim, blocker, parked)
                    if new_sim is None:
                        continue
                    next_frontier.append(judged(
                        new_sim, relocations + [(blocker, original, parked)]))
            if not next_frontier:
                return None
            frontier = next_frontier
        return None

    def _simulate_move(self, world: WorldState, object_id: str,
                       pose: Pose) -> WorldState | None:
        try:
            plan = self.compiler.compile(
                world, Instruction(object_id, "Move",
                                   PlacementTarget(pose=pose)))
            return simulate_plan(world, plan)
        except Exception:
            return None

    def _find_parking(self, world: WorldState, instruction: Instruction,
                      blocker: str) -> Pose | None:
        """Nearest pose where moving the blocker is feasible and actually
        takes it out of the way of the instruction.

        Progress for an ordinary blocker means the failure stops naming it;
        relocating the placement-target container only helps if it makes the
        whole instruction pass, since the failure names whatever blocked the
        container, not the container itself.
        """
        is_target_container = (
            isinstance(instruction.param, PlacementTarget)
            and instruction.param.into == blocker)
        from ..spatial.predicates import placement_check

        inst = world.object(blocker)
        step = RESOLUTION
        n = int(R_PARK / step)
        offsets = sorted(
            ((math.hypot(ix * step, iy * step), ix * step, iy * step)
             for ix in range(-n, n + 1) for iy in range(-n, n + 1)
             if ix or iy),
            key=lambda t: (t[0], t[2], t[1]))
        for _d, ox, oy in offsets:
            x, y = inst.pose.x + ox, inst.pose.y + oy
            z = self._drop_height(world, blocker, x, y)
            pose = Pose(x, y, z, inst.pose.yaw)
            # cheap geometric screen before the full chain
            if not placement_check(world, blocker, pose).ok:
                continue
            verdict = self.engine.evaluate(world, blocker, "Move",
                                           PlacementTarget(pose=pose))
            if not verdict.feasible:
                continue
            sim = self._simulate_move(world, blocker, pose)
            if sim is None:
                continue
            after = self.engine.evaluate(sim, instruction.object_id,
                                         instruction.action, instruction.param)
            if after.feasible:
                return pose
            if is_target_container:
                continue
            still = _failure_object_ids(sim, after.explanation.condition)
            if blocker not in still:
                return pose
        return None

    def _drop_height(self, world: WorldState, object_id: str,
                     x: float, y: float) -> float:
        """Top of the highest support under (x, y), or the floor."""
        best = 0.0
        for sid, box, is_container in world.support_candidates(object_id):
            if is_container:
                continue
            if box.footprint_contains(x, y):
                best = max(best, box.z1)
        return best

    def _assemble_auto_plan(self, world: WorldState, instruction: Instruction,
                            relocations: list[tuple[str, Pose, Pose]]
                            ) -> ActionPlan | None:
        """Relocations, then the untouched instruction, then restoration of a
        relocated placement-target container."""
        try:
            steps = []
            sim = world
            robot_id = None
            for blocker, _original, parking in relocations:
                sub = self.compiler.compile(
                    sim, Instruction(blocker, "Move",
                                     PlacementTarget(pose=parking)))
                robot_id = robot_id or sub.robot_id
                steps.extend(sub.steps)
                sim = simulate_plan(sim, sub)

            main = self.compiler.compile(sim, instruction, robot_id=robot_id)
            robot_id = robot_id or main.robot_id
            steps.extend(main.steps)
            sim = simulate_plan(sim, main)

            if isinstance(instruction.param, PlacementTarget):
                container = instruction.param.into
                for blocker, original, _parking in relocations:
                    if blocker == container:
                        back = self.compiler.compile(
                            sim, Instruction(blocker, "Move",
                                             PlacementTarget(pose=original)),
                            robot_id=robot_id)
                        steps.extend(back.steps)
                        sim = simulate_plan(sim, back)
        except Exception:
            return None
        from .plan import _next_plan_id
        return ActionPlan(
            plan_id=_next_plan_id(), robot_id=robot_id,
            steps=tuple(steps), provenance="Auto", revision=world.revision,
            instruction=instruction)

    # -- Alternative ------------------------------------------------------------

    def alternative_resolve(self, world: WorldState, instruction: Instruction,
                            failed: FailureCondition) -> Alternative | None:
        same = self._same_class_alternative(world, instruction)
        if same is not None:
            return same
        return self._pose_alternative(world, instruction)

    def _same_class_alternative(self, world: WorldState,
                                instruction: Instruction) -> Alternative | None:
        if instruction.object_id == FLOOR_ID:
            return None
        origin = world.object(instruction.object_id)
        candidates = []
        for oid in sorted(world.objects):
            if oid == instruction.object_id:
                continue
            other = world.objects[oid]
            if other.class_name != origin.class_name:
                continue
            dist = math.dist(
                (other.pose.x, other.pose.y, other.pose.z),
                (origin.pose.x, origin.pose.y, origin.pose.z))
            candidates.append((dist, oid))
        for _dist, oid in sorted(candidates):
            verdict = self.engine.evaluate(world, oid, instruction.action,
                                           instruction.param)
            if verdict.feasible:
                try:
                    plan = self.compiler.compile(
                        world, Instruction(oid, instruction.action,
                                           instruction.param),
                        provenance="Alternative")
                except PlanError:
                    continue
                return Alternative(kind="SameClassObject", object_id=oid,
                                   pose=None, plan=plan)
        return None

    def _pose_alternative(self, world: WorldState,
                          instruction: Instruction) -> Alternative | None:
        param = instruction.param
        if not isinstance(param, PlacementTarget) or param.pose is None \
                or param.into is not None:
            return None
        requested = param.pose
        anchor = world.resolve_support(instruction.object_id, pose=requested)
        if anchor is None:
            return None
        n = int(R_ALT / RESOLUTION)
        offsets = sorted(
            ((math.hypot(ix * RESOLUTION, iy * RESOLUTION),
              ix * RESOLUTION, iy * RESOLUTION)
             for ix in range(-n, n + 1) for iy in range(-n, n + 1)
             if ix or iy),
            key=lambda t: (t[0], t[2], t[1]))
        for dist, ox, oy in offsets:
            if dist > R_ALT + 1e-9:
                continue
            pose = Pose(requested.x + ox, requested.y + oy, requested.z,
                        requested.yaw)
            if world.resolve_support(instruction.object_id, pose=pose) != anchor:
                continue
            shifted = PlacementTarget(pose=pose)
            verdict = self.engine.evaluate(world, instruction.object_id,
                                           instruction.action, shifted)
            if verdict.feasible:
                try:
                    plan = self.compiler.compile(
                        world, Instruction(instruction.object_id,
                                           instruction.action, shifted),
                        provenance="Alternative")
                except PlanError:
                    continue
                return Alternative(kind="AlternativePose", object_id=None,
                                   pose=pose, plan=plan)
        return None

    # -- Ignore + aggregation ----------------------------------------------------

    def ignore_override(self, world: WorldState, instruction: Instruction,
                        failed: FailureCondition | None) -> ActionPlan:
        return self.compiler.compile(
            world, instruction, provenance="IgnoreOverride", force=True,
            unresolved=failed.to_dict() if failed else None)

    def build_offer(self, world: WorldState, instruction: Instruction,
                    failed: FailureCondition) -> ResolutionOffer:
        return ResolutionOffer(
            auto=self.auto_resolve(world, instruction, failed),
            alternative=self.alternative_resolve(world, instruction, failed),
            ignore_available=True,
        )


def _plan_cost(plan: ActionPlan) -> float:
    total = 0.0
    for step in plan.steps:
        if step.base is not None:
            total += step.base.path_cost
    return total
