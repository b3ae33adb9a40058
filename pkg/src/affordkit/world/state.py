"""Mutable world state and its mutation protocol.

The world is a single-writer structure: `apply_mutation` returns a new
`WorldState` sharing unchanged entities with its predecessor, so any number of
readers can keep working on the snapshot they hold. Every applied mutation
bumps the revision by exactly one.
"""

from __future__ import annotations

import copy
import math
import uuid
from dataclasses import dataclass, field, replace

from ..errors import InvariantViolation, SupportCycle, UnknownEntity
from ..geometry import Box, Pose, boxes_intersect, penetration_depth
from .schema import ClassRegistry, Intrinsic

# Tolerances: interpenetration allowed up to PEN_TOL; an object counts as
# resting on a surface when the gap underneath is below SUPPORT_GAP.
PEN_TOL = 0.001
SUPPORT_GAP = 0.005

# Wall/floor thickness assumed when treating a container's interior as
# a placement volume.
CONTAINER_WALL = 0.01

FLOOR_ID = "floor"

COLOR_STATES = ("Normal", "Limited")
ROBOT_PHASES = ("Idle", "Navigating", "Manipulating", "Failed")


@dataclass(frozen=True)
class XObjectInstance:
    id: str
    class_name: str
    pose: Pose
    color_state: str = "Normal"
    supported_by: str | None = None
    contains: tuple[str, ...] = ()
    fill_level: float = 0.0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "class": self.class_name,
            "pose": self.pose.to_dict(),
            "color_state": self.color_state,
            "supported_by": self.supported_by,
            "contains": list(self.contains),
            "fill_level": self.fill_level,
        }


@dataclass(frozen=True)
class XRobotSpec:
    id: str
    capabilities: frozenset[str]
    payload_max: float
    gripper_aperture_max: float
    lift_range: tuple[float, float]
    arm_extension_max: float
    base_footprint_radius: float
    nav_speed: float = 0.5
    lift_speed: float = 0.2
    arm_speed: float = 0.2

    def __post_init__(self) -> None:
        if self.lift_range[1] <= self.lift_range[0]:
            raise InvariantViolation(f"robot {self.id}: degenerate lift range")
        if self.arm_extension_max <= 0.0 or self.base_footprint_radius <= 0.0:
            raise InvariantViolation(f"robot {self.id}: degenerate geometry")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "capabilities": sorted(self.capabilities),
            "payload_max": self.payload_max,
            "gripper_aperture_max": self.gripper_aperture_max,
            "lift_range": list(self.lift_range),
            "arm_extension_max": self.arm_extension_max,
            "base_footprint_radius": self.base_footprint_radius,
            "nav_speed": self.nav_speed,
            "lift_speed": self.lift_speed,
            "arm_speed": self.arm_speed,
        }


@dataclass(frozen=True)
class RobotState:
    robot_id: str
    base_pose: Pose
    lift_z: float = 0.0
    arm_ext: float = 0.0
    battery: float = 1.0
    phase: str = "Idle"
    holding: str | None = None  # object id attached to the gripper

    def to_dict(self) -> dict:
        return {
            "robot_id": self.robot_id,
            "base_pose": self.base_pose.to_dict(),
            "lift_z": self.lift_z,
            "arm_ext": self.arm_ext,
            "battery": self.battery,
            "phase": self.phase,
            "holding": self.holding,
        }


@dataclass(frozen=True)
class StaticElement:
    id: str
    box: Box
    blocks_navigation: bool = True
    support_surface: bool = False

    def to_dict(self) -> dict:
        b = self.box
        return {
            "id": self.id,
            "center": [b.cx, b.cy],
            "size": [b.half_w * 2.0, b.half_d * 2.0],
            "z": [b.z0, b.z1],
            "yaw": b.yaw,
            "blocks_navigation": self.blocks_navigation,
            "support_surface": self.support_surface,
        }


@dataclass(frozen=True)
class Door:
    id: str
    open: bool
    span: Box

    def to_dict(self) -> dict:
        b = self.span
        return {
            "id": self.id,
            "open": self.open,
            "span": {"center": [b.cx, b.cy], "size": [b.half_w * 2.0, b.half_d * 2.0],
                     "z": [b.z0, b.z1], "yaw": b.yaw},
        }


# ---------------------------------------------------------------------------
# Mutations

@dataclass(frozen=True)
class SetPose:
    object_id: str
    pose: Pose


@dataclass(frozen=True)
class SetFill:
    object_id: str
    level: float


@dataclass(frozen=True)
class SetDoor:
    door_id: str
    open: bool


@dataclass(frozen=True)
class SetColorState:
    object_id: str
    color_state: str


@dataclass(frozen=True)
class AttachSupport:
    object_id: str
    support_id: str


@dataclass(frozen=True)
class DetachSupport:
    object_id: str


@dataclass(frozen=True)
class SetHolding:
    robot_id: str
    object_id: str | None


@dataclass(frozen=True)
class SetRobotPose:
    robot_id: str
    base_pose: Pose
    lift_z: float | None = None
    arm_ext: float | None = None


@dataclass(frozen=True)
class SetRobotPhase:
    robot_id: str
    phase: str


Mutation = (SetPose | SetFill | SetDoor | SetColorState | AttachSupport
            | DetachSupport | SetHolding | SetRobotPose | SetRobotPhase)

MUTATION_TYPES = {
    "set_pose": SetPose,
    "set_fill": SetFill,
    "set_door": SetDoor,
    "set_color_state": SetColorState,
    "attach_support": AttachSupport,
    "detach_support": DetachSupport,
    "set_holding": SetHolding,
    "set_robot_pose": SetRobotPose,
    "set_robot_phase": SetRobotPhase,
}


def mutation_to_dict(m: Mutation) -> dict:
    if isinstance(m, SetPose):
        return {"kind": "set_pose", "object_id": m.object_id, "pose": m.pose.to_dict()}
    if isinstance(m, SetFill):
        return {"kind": "set_fill", "object_id": m.object_id, "level": m.level}
    if isinstance(m, SetDoor):
        return {"kind": "set_door", "door_id": m.door_id, "open": m.open}
    if isinstance(m, SetColorState):
        return {"kind": "set_color_state", "object_id": m.object_id,
                "color_state": m.color_state}
    if isinstance(m, AttachSupport):
        return {"kind": "attach_support", "object_id": m.object_id,
                "support_id": m.support_id}
    if isinstance(m, DetachSupport):
        return {"kind": "detach_support", "object_id": m.object_id}
    if isinstance(m, SetHolding):
        return {"kind": "set_holding", "robot_id": m.robot_id, "object_id": m.object_id}
    if isinstance(m, SetRobotPose):
        return {"kind": "set_robot_pose", "robot_id": m.robot_id,
                "base_pose": m.base_pose.to_dict(), "lift_z": m.lift_z,
                "arm_ext": m.arm_ext}
    if isinstance(m, SetRobotPhase):
        return {"kind": "set_robot_phase", "robot_id": m.robot_id, "phase": m.phase}
    raise TypeError(f"not a mutation: {m!r}")


def mutation_from_dict(d: dict) -> Mutation:
    kind = d.get("kind")
    if kind == "set_pose":
        return SetPose(d["object_id"], Pose.from_dict(d["pose"]))
    if kind == "set_fill":
        return SetFill(d["object_id"], float(d["level"]))
    if kind == "set_door":
        return SetDoor(d["door_id"], bool(d["open"]))
    if kind == "set_color_state":
        return SetColorState(d["object_id"], d["color_state"])
    if kind == "attach_support":
        return AttachSupport(d["object_id"], d["support_id"])
    if kind == "detach_support":
        return DetachSupport(d["object_id"])
    if kind == "set_holding":
        return SetHolding(d["robot_id"], d.get("object_id"))
    if kind == "set_robot_pose":
        return SetRobotPose(d["robot_id"], Pose.from_dict(d["base_pose"]),
                            d.get("lift_z"), d.get("arm_ext"))
    if kind == "set_robot_phase":
        return SetRobotPhase(d["robot_id"], d["phase"])
    raise UnknownEntity(f"unknown mutation kind {kind!r}")


# ---------------------------------------------------------------------------
# World

@dataclass
class WorldState:
    registry: ClassRegistry
    statics: tuple[StaticElement, ...]
    doors: tuple[Door, ...]
    objects: dict[str, XObjectInstance]
    robot_specs: dict[str, XRobotSpec]
    robot_states: dict[str, RobotState]
    bounds: tuple[float, float, float, float]  # x0, y0, x1, y1
    revision: int = 0
    # process-local snapshot identity: changes with every mutation, so caches
    # keyed on it can never mix up diverging simulation branches; never
    # serialized
    token: str = ""

    # -- accessors ---------------------------------------------------------

    def object(self, object_id: str) -> XObjectInstance:
        try:
            return self.objects[object_id]
        except KeyError:
            raise UnknownEntity(f"unknown object {object_id!r}") from None

    def robot_ids(self) -> list[str]:
        return list(self.robot_specs)

    def door(self, door_id: str) -> Door:
        for d in self.doors:
            if d.id == door_id:
                return d
        raise UnknownEntity(f"unknown door {door_id!r}")

    def intrinsic(self, object_id: str) -> Intrinsic:
        return self.registry.effective_intrinsic(self.object(object_id).class_name)

    def object_box(self, object_id: str) -> Box:
        inst = self.object(object_id)
        intr = self.registry.effective_intrinsic(inst.class_name)
        return Box.from_pose_size(inst.pose, intr.size)

    def held_ids(self) -> set[str]:
        """Objects attached to a gripper, plus everything they contain."""
        held: set[str] = set()
        for st in self.robot_states.values():
            if st.holding is not None:
                held.add(st.holding)
        # contents ride along with a held container
        frontier = list(held)
        while frontier:
            oid = frontier.pop()
            inst = self.objects.get(oid)
            if inst is None:
                continue
            for child in inst.contains:
                if child not in held:
                    held.add(child)
                    frontier.append(child)
        return held

    def solid_boxes(self, exclude: set[str] | None = None,
                    include_open_doors: bool = False) -> list[tuple[str, Box]]:
        """Every collidable box with its owner id, ordered deterministically."""
        exclude = exclude or set()
        held = self.held_ids()
        out: list[tuple[str, Box]] = []
        for s in self.statics:
            if s.id not in exclude:
                out.append((s.id, s.box))
        for d in self.doors:
            if d.id in exclude:
                continue
            if d.open and not include_open_doors:
                continue
            out.append((d.id, d.span))
        for oid in sorted(self.objects):
            if oid in exclude or oid in held:
                continue
            out.append((oid, self.object_box(oid)))
        return out

    def effective_weight(self, object_id: str) -> float:
        """Object weight plus the weight of everything it contains."""
        total = self.intrinsic(object_id).weight
        for child in self.object(object_id).contains:
            total += self.effective_weight(child)
        return total

    def total_fill_weight(self, object_id: str) -> float:
        return self.effective_weight(object_id)

    # -- support resolution --------------------------------------------------

    def support_candidates(self, object_id: str) -> list[tuple[str, Box, bool]]:
        """(id, box, is_container) of every entity that can support others."""
        out: list[tuple[str, Box, bool]] = []
        for s in self.statics:
            if s.support_surface:
                out.append((s.id, s.box, False))
        for oid in sorted(self.objects):
            if oid == object_id:
                continue
            intr = self.intrinsic(oid)
            if intr.is_support_surface or intr.stackable or intr.is_container:
                out.append((oid, self.object_box(oid), intr.is_container))
        return out

    def resolve_support(self, object_id: str,
                        pose: Pose | None = None) -> str | None:
        """Topmost entity whose top face sits just under the object's bottom.

        A candidate supports the object when its top face is within
        SUPPORT_GAP below the object's bottom face and its footprint contains
        the object's center. Containers support via their interior floor.
        Returns FLOOR_ID for objects resting on the ground, None when the
        object floats.
        """
        inst = self.object(object_id)
        pose = pose or inst.pose
        bottom = pose.z
        best: tuple[float, str] | None = None
        for sid, box, is_container in self.support_candidates(object_id):
            if is_container:
                interior = box.shrunk(CONTAINER_WALL, CONTAINER_WALL)
                top = interior.z0
                footprint_ok = interior.footprint_contains(pose.x, pose.y)
            else:
                top = box.z1
                footprint_ok = box.footprint_contains(pose.x, pose.y)
            if not footprint_ok:
                continue
            gap = bottom - top
            if -PEN_TOL <= gap < SUPPORT_GAP:
                if best is None or top > best[0]:
                    best = (top, sid)
        if best is not None:
            return best[1]
        if -PEN_TOL <= bottom < SUPPORT_GAP:
            return FLOOR_ID
        return None

    def check_support_acyclic(self) -> None:
        for oid in self.objects:
            seen = set()
            cur: str | None = oid
            while cur is not None and cur in self.objects:
                if cur in seen:
                    raise SupportCycle(f"support cycle through {cur!r}")
                seen.add(cur)
                cur = self.objects[cur].supported_by

    def supported_children(self, object_id: str) -> list[str]:
        return sorted(oid for oid, inst in self.objects.items()
                      if inst.supported_by == object_id)

    # -- collision -----------------------------------------------------------

    def collision_ids(self, box: Box, exclude: set[str],
                      tol: float = PEN_TOL) -> list[str]:
        """Ids of solids penetrated by `box` beyond `tol`.

        A box fully inside a container's interior does not collide with that
        container (the walls are around it, not through it).
        """
        hits = []
        for sid, other in self.solid_boxes(exclude=exclude):
            if penetration_depth(box, other) <= tol:
                continue
            if self._inside_container(box, sid, other):
                continue
            hits.append(sid)
        return hits

    def _inside_container(self, box: Box, sid: str, other: Box) -> bool:
        inst = self.objects.get(sid)
        if inst is None:
            return False
        if not self.registry.effective_intrinsic(inst.class_name).is_container:
            return False
        interior = other.shrunk(CONTAINER_WALL, CONTAINER_WALL)
        for (cx, cy) in box.corners():
            if not interior.footprint_contains(cx, cy, eps=PEN_TOL):
                return False
        return interior.z0 - PEN_TOL <= box.z0 and box.z1 <= other.z1 + 1.0

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "revision": self.revision,
            "bounds": list(self.bounds),
            "classes": {
                name: {
                    "intrinsic": self.registry.effective_intrinsic(name).to_dict(),
                    "methods": [m.name
                                for m in self.registry.effective_methods(name)],
                }
                for name in self.registry.names()
            },
            "statics": [s.to_dict() for s in self.statics],
            "doors": [d.to_dict() for d in self.doors],
            "objects": {oid: o.to_dict() for oid, o in sorted(self.objects.items())},
            "robots": {
                rid: {"spec": self.robot_specs[rid].to_dict(),
                      "state": self.robot_states[rid].to_dict()}
                for rid in sorted(self.robot_specs)
            },
        }


# ---------------------------------------------------------------------------
# Mutation application

def _recompute_support(world: WorldState, object_id: str) -> None:
    inst = world.objects[object_id]
    new_support = world.resolve_support(object_id)
    if new_support != inst.supported_by:
        world.objects[object_id] = replace(inst, supported_by=new_support)


def _update_containment(world: WorldState, object_id: str) -> None:
    """Keep container `contains` lists consistent with the object's support."""
    inst = world.objects[object_id]
    for cid in sorted(world.objects):
        if cid == object_id:
            continue
        cont = world.objects[cid]
        if object_id in cont.contains and inst.supported_by != cid:
            world.objects[cid] = replace(
                cont, contains=tuple(x for x in cont.contains if x != object_id))
    if inst.supported_by in world.objects:
        parent = world.objects[inst.supported_by]
        intr = world.registry.effective_intrinsic(parent.class_name)
        if intr.is_container and object_id not in parent.contains:
            world.objects[inst.supported_by] = replace(
                parent, contains=tuple(sorted(parent.contains + (object_id,))))


def apply_mutation(world: WorldState, mutation: Mutation) -> WorldState:
    """Apply one mutation, returning a new world at revision + 1.

    Raises UnknownEntity for dangling references and InvariantViolation when
    the change would corrupt the world; the input world is never modified.
    """
    new = WorldState(
        registry=world.registry,
        statics=world.statics,
        doors=world.doors,
        objects=dict(world.objects),
        robot_specs=world.robot_specs,
        robot_states=dict(world.robot_states),
        bounds=world.bounds,
        revision=world.revision + 1,
        token=uuid.uuid4().hex,
    )

    if isinstance(mutation, SetPose):
        inst = new.object(mutation.object_id)
        intr = new.registry.effective_intrinsic(inst.class_name)
        box = Box.from_pose_size(mutation.pose, intr.size)
        held = new.held_ids()
        if mutation.object_id not in held:
            hits = new.collision_ids(box, exclude={mutation.object_id})
            if hits:
                raise InvariantViolation(
                    f"{mutation.object_id} would interpenetrate {hits}")
        new.objects[mutation.object_id] = replace(inst, pose=mutation.pose)
        _recompute_support(new, mutation.object_id)
        _update_containment(new, mutation.object_id)
        # anything that was resting on the moved object may now float
        for child in world.supported_children(mutation.object_id):
            if child in new.objects:
                _recompute_support(new, child)
                _update_containment(new, child)
        new.check_support_acyclic()
        return new

    if isinstance(mutation, SetFill):
        inst = new.object(mutation.object_id)
        if not (0.0 <= mutation.level <= 1.0):
            raise InvariantViolation(f"fill level {mutation.level} outside [0, 1]")
        new.objects[mutation.object_id] = replace(inst, fill_level=mutation.level)
        return new

    if isinstance(mutation, SetDoor):
        found = False
        doors = []
        for d in new.doors:
            if d.id == mutation.door_id:
                doors.append(Door(d.id, mutation.open, d.span))
                found = True
            else:
                doors.append(d)
        if not found:
            raise UnknownEntity(f"unknown door {mutation.door_id!r}")
        new.doors = tuple(doors)
        return new

    if isinstance(mutation, SetColorState):
        inst = new.object(mutation.object_id)
        if mutation.color_state not in COLOR_STATES:
            raise InvariantViolation(f"bad color state {mutation.color_state!r}")
        new.objects[mutation.object_id] = replace(
            inst, color_state=mutation.color_state)
        return new

    if isinstance(mutation, AttachSupport):
        inst = new.object(mutation.object_id)
        sid = mutation.support_id
        known = (sid == FLOOR_ID or sid in new.objects
                 or any(s.id == sid for s in new.statics))
        if not known:
            raise UnknownEntity(f"unknown support {sid!r}")
        new.objects[mutation.object_id] = replace(inst, supported_by=sid)
        _update_containment(new, mutation.object_id)
        new.check_support_acyclic()
        return new

    if isinstance(mutation, DetachSupport):
        inst = new.object(mutation.object_id)
        new.objects[mutation.object_id] = replace(inst, supported_by=None)
        _update_containment(new, mutation.object_id)
        return new

    if isinstance(mutation, SetHolding):
        state = new.robot_states.get(mutation.robot_id)
        if state is None:
            raise UnknownEntity(f"unknown robot {mutation.robot_id!r}")
        if mutation.object_id is not None:
            new.object(mutation.object_id)
        new.robot_states[mutation.robot_id] = replace(
            state, holding=mutation.object_id)
        return new

    if isinstance(mutation, SetRobotPose):
        state = new.robot_states.get(mutation.robot_id)
        if state is None:
            raise UnknownEntity(f"unknown robot {mutation.robot_id!r}")
        spec = new.robot_specs[mutation.robot_id]
        lift = state.lift_z if mutation.lift_z is None else mutation.lift_z
        arm = state.arm_ext if mutation.arm_ext is None else mutation.arm_ext
        if not (spec.lift_range[0] - 1e-9 <= lift <= spec.lift_range[1] + 1e-9):
            raise InvariantViolation(f"lift {lift} outside range")
        if not (-1e-9 <= arm <= spec.arm_extension_max + 1e-9):
            raise InvariantViolation(f"arm extension {arm} outside range")
        new.robot_states[mutation.robot_id] = replace(
            state, base_pose=mutation.base_pose, lift_z=lift, arm_ext=arm)
        return new

    if isinstance(mutation, SetRobotPhase):
        state = new.robot_states.get(mutation.robot_id)
        if state is None:
            raise UnknownEntity(f"unknown robot {mutation.robot_id!r}")
        if mutation.phase not in ROBOT_PHASES:
            raise InvariantViolation(f"bad phase {mutation.phase!r}")
        new.robot_states[mutation.robot_id] = replace(state, phase=mutation.phase)
        return new

    raise TypeError(f"not a mutation: {mutation!r}")


def changed_entities(old: WorldState, new: WorldState) -> dict:
    """Delta payload: full records of every entity that differs."""
    delta: dict = {"objects": {}, "doors": [], "robots": {}}
    for oid, inst in new.objects.items():
        if oid not in old.objects or old.objects[oid] != inst:
            delta["objects"][oid] = inst.to_dict()
    for d_new in new.doors:
        d_old = next((d for d in old.doors if d.id == d_new.id), None)
        if d_old != d_new:
            delta["doors"].append(d_new.to_dict())
    for rid, st in new.robot_states.items():
        if rid not in old.robot_states or old.robot_states[rid] != st:
            delta["robots"][rid] = st.to_dict()
    return delta
