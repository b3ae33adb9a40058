"""Execution events, goal messages, and fault injection profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..geometry import Pose

EVENT_KINDS = ("StepStarted", "PoseUpdate", "StepSucceeded", "StepFailed",
               "PlanSucceeded", "PlanFailed", "AwaitingHuman", "Preempted")

TERMINAL_KINDS = ("PlanSucceeded", "PlanFailed", "Preempted")


@dataclass(frozen=True)
class ExecutionEvent:
    timestamp: float  # simulated seconds since plan start
    robot_id: str
    kind: str
    plan_id: str
    step_index: int | None = None
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "timestamp": round(self.timestamp, 6),
            "robot_id": self.robot_id,
            "kind": self.kind,
            "plan_id": self.plan_id,
            "step_index": self.step_index,
            "data": self.data,
        }


@dataclass(frozen=True)
class GoalMessage:
    """Command vocabulary a physical bridge would consume."""

    kind: str  # NavigateToPose | FollowJointTrajectory | GripperGrasp | GripperRelease
    goal_id: str
    plan_id: str
    step_index: int
    target: Pose | None = None
    waypoints: tuple[tuple[float, float, bool], ...] = ()  # lift, ext, gripper open
    object_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "goal_id": self.goal_id,
            "plan_id": self.plan_id,
            "step_index": self.step_index,
            "target": self.target.to_dict() if self.target else None,
            "waypoints": [list(w) for w in self.waypoints],
            "object_id": self.object_id,
        }


@dataclass(frozen=True)
class FaultProfile:
    """Deterministic by default; nonzero values emulate physical flakiness."""

    pose_noise_sigma: float = 0.0
    step_failure_prob: float = 0.0
    seed: int = 0

    def to_dict(self) -> dict:
        return {"pose_noise_sigma": self.pose_noise_sigma,
                "step_failure_prob": self.step_failure_prob,
                "seed": self.seed}

    @staticmethod
    def from_dict(d: dict | None) -> "FaultProfile":
        if not d:
            return FaultProfile()
        return FaultProfile(
            pose_noise_sigma=float(d.get("pose_noise_sigma", 0.0)),
            step_failure_prob=float(d.get("step_failure_prob", 0.0)),
            seed=int(d.get("seed", 0)),
        )
