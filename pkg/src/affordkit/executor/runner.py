"""Simulated plan execution: a per-robot state machine over ticks.

Each tick advances the simulated clock by TICK_SECONDS. Navigation moves the
base along the step's path emitting pose updates; world mutations happen only
at step completion, so aborting mid-plan never leaves the world between
states. With a zero fault profile the final world equals the plan's forward
simulation exactly.
"""

from __future__ import annotations

import math
import random
from dataclasses import replace

from ..errors import StalePlan, UnknownPlan
from ..geometry import Pose
from ..resolution.plan import ActionPlan, PlanStep, step_effects
from ..spatial.predicates import is_graspable, occlusion_check, placement_check
from ..world.state import (Mutation, SetColorState, SetPose, SetRobotPhase,
                           WorldState, apply_mutation, mutation_to_dict)
from .events import ExecutionEvent, FaultProfile, GoalMessage

TICK_SECONDS = 0.05


class WorldHandle:
    """Single-writer access to the evolving world."""

    def __init__(self, world: WorldState):
        self.world = world

    def apply(self, mutation: Mutation) -> WorldState:
        self.world = apply_mutation(self.world, mutation)
        return self.world


class PlanExecutor:
    """Runs one plan to a terminal event, one tick at a time."""

    def __init__(self, handle: WorldHandle, plan: ActionPlan,
                 profile: FaultProfile | None = None,
                 rng: random.Random | None = None,
                 check_revision: bool = True):
        if check_revision and handle.world.revision != plan.revision:
            raise StalePlan(f"plan at revision {plan.revision}, "
                            f"world at {handle.world.revision}")
        self.handle = handle
        self.plan = plan
        self.profile = profile or FaultProfile()
        self.rng = rng if rng is not None else random.Random(self.profile.seed)
        self.t = 0.0
        self.step_index = 0
        self.goals: list[GoalMessage] = []
        self.events: list[ExecutionEvent] = []
        self.awaiting: PlanStep | None = None
        self._travel: list[tuple[float, float, float]] | None = None
        self._travel_s = 0.0
        self._dwell = 0.0
        self._step_started = False
        self._preempted = False
        self._goal_counter = 0
        self.done = False

    # -- public ---------------------------------------------------------------

    def preempt(self) -> None:
        if self.done:
            raise UnknownPlan(f"plan {self.plan.plan_id} is not running")
        self._preempted = True

    def notify_mutation(self, mutation: Mutation) -> None:
        """External mutation arrived; resume a waiting step when it matches."""
        if self.awaiting is not None and self.awaiting.awaited == mutation:
            self._finish_step(apply_effects=False)

    def tick(self) -> list[ExecutionEvent]:
        """Advance one tick; returns the events it produced."""
        if self.done:
            return []
        start = len(self.events)
        self.t += TICK_SECONDS

        if self._preempted:
            self._emit("Preempted", step_index=self.step_index)
            self.done = True
            return self.events[start:]

        if self.awaiting is not None:
            return self.events[start:]  # clock runs while the human works

        if self.step_index >= len(self.plan.steps):
            self._emit("PlanSucceeded")
            self.done = True
            return self.events[start:]

        step = self.plan.steps[self.step_index]
        if not self._step_started:
            self._start_step(step)
            if self.done or self.awaiting is not None:
                return self.events[start:]

        spec = self.handle.world.robot_specs[self.plan.robot_id]
        if self._travel is not None:
            self._travel_s += spec.nav_speed * TICK_SECONDS
            x, y, yaw = _sample(self._travel, self._travel_s)
            self._emit("PoseUpdate", step_index=self.step_index,
                       data={"entity": self.plan.robot_id,
                             "pose": Pose(x, y, 0.0, yaw).to_dict()})
            carried = self.handle.world.robot_states[self.plan.robot_id].holding
            if carried is not None:
                lift = self.handle.world.robot_states[self.plan.robot_id].lift_z
                self._emit("PoseUpdate", step_index=self.step_index,
                           data={"entity": carried,
                                 "pose": Pose(x, y, lift, yaw).to_dict()})
            if self._travel_s >= self._travel[-1][2] - 1e-9:
                self._travel = None
            return self.events[start:]

        if self._dwell > 1e-9:
            self._dwell -= TICK_SECONDS
            return self.events[start:]

        self._finish_step(apply_effects=True)
        return self.events[start:]

    def run(self, human=None, max_ticks: int = 2_000_000) -> list[ExecutionEvent]:
        """Tick to completion. `human(prompt, awaited_mutation)` may return a
        mutation to apply (None means: apply the awaited one)."""
        for _ in range(max_ticks):
            if self.done:
                return self.events
            self.tick()
            if self.awaiting is not None:
                step = self.awaiting
                mutation = None
                if human is not None:
                    mutation = human(step.prompt, step.awaited)
                if mutation is None:
                    mutation = step.awaited
                if mutation is not None:
                    self.handle.apply(mutation)
                    self.notify_mutation(mutation)
                else:
                    self._fail_step("no human response for "
                                    f"{step.prompt!r}")
        raise RuntimeError("executor exceeded tick budget")

    # -- internals ---------------------------------------------------------------

    def _emit(self, kind: str, step_index: int | None = None,
              data: dict | None = None) -> None:
        self.events.append(ExecutionEvent(
            timestamp=round(self.t, 6), robot_id=self.plan.robot_id, kind=kind,
            plan_id=self.plan.plan_id, step_index=step_index,
            data=data or {}))

    def _next_goal_id(self) -> str:
        self._goal_counter += 1
        return f"{self.plan.plan_id}-g{self._goal_counter}"

    def _start_step(self, step: PlanStep) -> None:
        self._step_started = True
        self._emit("StepStarted", step_index=self.step_index,
                   data={"kind": step.kind})
        self._publish_goals(step)

        if self.profile.step_failure_prob > 0.0:
            if self.rng.random() < self.profile.step_failure_prob:
                self._fail_step("injected fault")
                return

        problem = self._physical_problem(step)
        if problem is not None:
            self._fail_step(problem)
            return

        if step.kind == "WaitForHuman":
            self.awaiting = step
            self._emit("AwaitingHuman", step_index=self.step_index,
                       data={"prompt": step.prompt})
            return

        world = self.handle.world
        state = world.robot_states[self.plan.robot_id]
        cells = step.base.path_cells if step.base is not None else step.cells
        if cells:
            points = [_cell_center(world, c) for c in cells]
            poly = _polyline([(state.base_pose.x, state.base_pose.y)]
                             + points if step.kind == "VacuumSweep" else points)
            if poly[-1][2] > 1e-9:
                self._travel = poly
                self._travel_s = 0.0
        spec = world.robot_specs[self.plan.robot_id]
        if step.kind in ("Pick", "Place") and step.base is not None:
            self._dwell = (abs(step.base.lift_z - state.lift_z) / spec.lift_speed
                           + 2.0 * step.base.arm_ext / spec.arm_speed)
        elif step.kind == "Fill":
            self._dwell = 2.0  # pour time
        else:
            self._dwell = 0.0

    def _publish_goals(self, step: PlanStep) -> None:
        idx = self.step_index
        if step.kind in ("NavigateTo", "Pick", "Place", "VacuumSweep"):
            target = step.target_pose or (step.base.base_pose if step.base else None)
            if target is not None:
                self.goals.append(GoalMessage(
                    kind="NavigateToPose", goal_id=self._next_goal_id(),
                    plan_id=self.plan.plan_id, step_index=idx, target=target))
        if step.kind in ("Pick", "Place") and step.base is not None:
            open_then_close = step.kind == "Pick"
            self.goals.append(GoalMessage(
                kind="FollowJointTrajectory", goal_id=self._next_goal_id(),
                plan_id=self.plan.plan_id, step_index=idx,
                waypoints=((step.base.lift_z, step.base.arm_ext, True),
                           (step.base.lift_z, step.base.arm_ext,
                            not open_then_close),
                           (step.base.lift_z, 0.0, not open_then_close))))
            self.goals.append(GoalMessage(
                kind="GripperGrasp" if step.kind == "Pick" else "GripperRelease",
                goal_id=self._next_goal_id(), plan_id=self.plan.plan_id,
                step_index=idx, object_id=step.object_id))

    def _physical_problem(self, step: PlanStep) -> str | None:
        """Hard limits the simulated hardware enforces regardless of planning."""
        world = self.handle.world
        spec = world.robot_specs[self.plan.robot_id]
        if step.kind == "Pick":
            if step.base is None:
                return f"{step.object_id} is out of reach"
            weight = world.effective_weight(step.object_id)
            if weight > spec.payload_max:
                return (f"{step.object_id} weighs {weight:g} kg, "
                        f"over the {spec.payload_max:g} kg payload")
            grasp = is_graspable(world, step.object_id, spec)
            if not grasp.ok:
                return f"gripper cannot close on {step.object_id}"
            occ = occlusion_check(world, step.object_id,
                                  include_drop_column=False)
            if not occ.clear:
                return f"{step.object_id} is blocked by {', '.join(occ.blockers)}"
        elif step.kind == "Place":
            if step.base is None or step.target_pose is None:
                return "placement is out of reach"
            result = placement_check(world, step.object_id, step.target_pose)
            if not result.ok:
                if result.unsupported:
                    return "nothing supports the object there"
                return f"placement collides with {', '.join(result.collisions)}"
        elif step.kind == "NavigateTo":
            if step.target_pose is None:
                return "no navigable target"
        elif step.kind == "Fill":
            if step.base is None:
                return "dispenser is out of reach"
        elif step.kind == "VacuumSweep":
            if step.force:
                return "area cannot be covered"
        return None

    def _fail_step(self, detail: str) -> None:
        from ..feasibility.conditions import execution_error

        condition = execution_error(self.step_index, detail)
        self._emit("StepFailed", step_index=self.step_index,
                   data={"condition": condition.to_dict(), "detail": detail})
        target = None
        step = self.plan.steps[self.step_index] \
            if self.step_index < len(self.plan.steps) else None
        if step is not None and step.object_id in self.handle.world.objects:
            target = step.object_id
        elif self.plan.instruction.object_id in self.handle.world.objects:
            target = self.plan.instruction.object_id
        if target is not None:
            self.handle.apply(SetColorState(target, "Limited"))
        self.handle.apply(SetRobotPhase(self.plan.robot_id, "Failed"))
        self._emit("PlanFailed", data={"condition": condition.to_dict()})
        self.awaiting = None
        self.done = True

    def _finish_step(self, apply_effects: bool) -> None:
        step = self.plan.steps[self.step_index]
        world = self.handle.world
        effects = step_effects(world, self.plan.robot_id, step) \
            if apply_effects else []
        try:
            for mutation in effects:
                mutation = self._perturb(step, mutation)
                self.handle.apply(mutation)
        except Exception as exc:
            self._fail_step(str(exc))
            return
        self._emit("StepSucceeded", step_index=self.step_index)
        self.awaiting = None
        self.step_index += 1
        self._step_started = False
        self._travel = None
        self._dwell = 0.0

    def _perturb(self, step: PlanStep, mutation: Mutation) -> Mutation:
        """Gaussian placement noise, consumed only when configured."""
        if (self.profile.pose_noise_sigma > 0.0 and step.kind == "Place"
                and isinstance(mutation, SetPose)
                and mutation.object_id == step.object_id):
            dx = self.rng.gauss(0.0, self.profile.pose_noise_sigma)
            dy = self.rng.gauss(0.0, self.profile.pose_noise_sigma)
            pose = mutation.pose
            return SetPose(mutation.object_id,
                           Pose(pose.x + dx, pose.y + dy, pose.z, pose.yaw))
        return mutation


def execute(world: WorldState, plan: ActionPlan,
            profile: FaultProfile | None = None, human=None,
            rng: random.Random | None = None
            ) -> tuple[list[ExecutionEvent], WorldState]:
    """Run a plan to completion at unbounded simulation speed."""
    handle = WorldHandle(world)
    executor = PlanExecutor(handle, plan, profile=profile, rng=rng)
    events = executor.run(human=human)
    return events, handle.world


# -- shared helpers -----------------------------------------------------------

def _cell_center(world: WorldState, cell: tuple[int, int]) -> tuple[float, float]:
    from ..spatial.grid import RESOLUTION

    x0, y0 = world.bounds[0], world.bounds[1]
    return (x0 + (cell[0] + 0.5) * RESOLUTION, y0 + (cell[1] + 0.5) * RESOLUTION)


def _polyline(points: list[tuple[float, float]]) -> list[tuple[float, float, float]]:
    out = []
    total = 0.0
    for i, (x, y) in enumerate(points):
        if i:
            px, py = points[i - 1]
            total += math.hypot(x - px, y - py)
        out.append((x, y, total))
    return out


def _sample(pts: list[tuple[float, float, float]],
            s: float) -> tuple[float, float, float]:
    s = max(0.0, min(s, pts[-1][2]))
    for i in range(1, len(pts)):
        x0, y0, s0 = pts[i - 1]
        x1, y1, s1 = pts[i]
        if s <= s1 and s1 - s0 > 1e-12:
            f = (s - s0) / (s1 - s0)
            return (x0 + f * (x1 - x0), y0 + f * (y1 - y0),
                    math.atan2(y1 - y0, x1 - x0))
    x, y, _ = pts[-1]
    return x, y, 0.0
