"""The action module: per-action check chains producing verdicts.

Each action family runs an ordered chain of checks per robot. Robots are
tried in declaration order; the first robot passing the whole chain makes the
instruction feasible. When all fail, the surfaced failure is the one from the
robot that got deepest into its chain (ties go to the earlier robot), since
that is the most actionable thing to tell the user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import (ArmBlocked, HeightOutOfRangeError, InvariantViolation,
                      NoFreeBase, ParamKindMismatch, UnknownObject)
from ..geometry import Box, Pose, polygon_intersects_footprint
from ..spatial.basepose import BasePoseSolution, solve_base_pose
from ..spatial.grid import NAV_BLOCK_HEIGHT, SpatialCache, shared_cache
from ..spatial.predicates import is_graspable, occlusion_check, placement_check
from ..world.schema import ActionDescriptor
from ..world.state import (CONTAINER_WALL, FLOOR_ID, SetFill, SetPose,
                           WorldState, XRobotSpec, apply_mutation)
from . import conditions as cond
from .catalog import Explanation, ExplanationCatalog, default_catalog
from .conditions import FailureCondition

# ---------------------------------------------------------------------------
# Spatial parameters

@dataclass(frozen=True)
class PlacementTarget:
    """Where a Move should end: a free pose, or the inside of a container."""

    pose: Pose | None = None
    into: str | None = None

    def to_dict(self) -> dict:
        return {"kind": "placement",
                "pose": self.pose.to_dict() if self.pose else None,
                "into": self.into}


@dataclass(frozen=True)
class AreaTarget:
    polygon: tuple[tuple[float, float], ...]

    def to_dict(self) -> dict:
        return {"kind": "area", "polygon": [list(p) for p in self.polygon]}


@dataclass(frozen=True)
class LevelTarget:
    level: float

    def to_dict(self) -> dict:
        return {"kind": "level", "level": self.level}


SpatialParam = PlacementTarget | AreaTarget | LevelTarget | None


def param_to_dict(param: SpatialParam) -> dict | None:
    return None if param is None else param.to_dict()


def param_from_dict(d: dict | None) -> SpatialParam:
    if d is None:
        return None
    kind = d.get("kind")
    if kind == "placement":
        pose = Pose.from_dict(d["pose"]) if d.get("pose") else None
        return PlacementTarget(pose=pose, into=d.get("into"))
    if kind == "area":
        return AreaTarget(tuple((float(x), float(y)) for x, y in d["polygon"]))
    if kind == "level":
        return LevelTarget(float(d["level"]))
    raise ParamKindMismatch(f"unknown param kind {kind!r}")


_PARAM_ACCEPTS = {
    "None": (type(None),),
    "PlacementPose": (type(None), PlacementTarget),
    "AreaPolygon": (type(None), AreaTarget),
    "ScalarLevel": (type(None), LevelTarget),
    "Height": (type(None), LevelTarget),
}


# ---------------------------------------------------------------------------
# Verdicts and menu entries

@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    explanation: Explanation | None
    checked_robot: str | None
    evaluated_at_revision: int
    resolvable: dict | None = None  # {"auto": bool, "alternative": bool}

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "explanation": self.explanation.to_dict() if self.explanation else None,
            "checked_robot": self.checked_robot,
            "evaluated_at_revision": self.evaluated_at_revision,
            "resolvable": self.resolvable,
        }

    def with_resolvable(self, auto: bool, alternative: bool) -> "FeasibilityVerdict":
        return FeasibilityVerdict(self.feasible, self.explanation,
                                  self.checked_robot, self.evaluated_at_revision,
                                  {"auto": auto, "alternative": alternative})


@dataclass(frozen=True)
class MenuEntry:
    action: ActionDescriptor
    state: str  # "Available" | "GrayedOut"
    explanation: Explanation | None = None

    def to_dict(self) -> dict:
        return {
            "action": self.action.to_dict(),
            "state": self.state,
            "explanation": self.explanation.to_dict() if self.explanation else None,
        }


class _ChainFailure(Exception):
    """Internal: aborts a chain with the failing depth and condition."""

    def __init__(self, depth: int, condition: FailureCondition):
        super().__init__(condition.variant)
        self.depth = depth
        self.condition = condition


# synthetic affordance of the floor pseudo-entity
FLOOR_VACUUM = ActionDescriptor(
    name="Vacuum", spatial_param="AreaPolygon",
    required_capabilities=frozenset({"navigate", "vacuum"}))


# ---------------------------------------------------------------------------
# Engine

def grasp_point(world: WorldState, object_id: str) -> tuple[float, float, float]:
    """Gripper target for an object: the center of its box."""
    box = world.object_box(object_id)
    return (box.cx, box.cy, (box.z0 + box.z1) / 2.0)


def pick_exemptions(world: WorldState, object_id: str) -> set[str]:
    """Solids the arm may overlap while grasping: target, support, contents."""
    inst = world.object(object_id)
    out = {object_id} | set(inst.contains)
    if inst.supported_by is not None and inst.supported_by != FLOOR_ID:
        out.add(inst.supported_by)
    return out


class FeasibilityEngine:
    """Evaluates instructions over world snapshots.

    Stateless apart from caches; safe to share across evaluations of the
    same world lineage.
    """

    def __init__(self, catalog: ExplanationCatalog | None = None,
                 cache: SpatialCache | None = None):
        self.catalog = catalog or default_catalog()
        self.cache = cache or SpatialCache()
        self._pick_memo: dict[tuple, tuple] = {}

    # -- public operations --------------------------------------------------

    def evaluate(self, world: WorldState, object_id: str, action: str,
                 param: SpatialParam = None) -> FeasibilityVerdict:
        if object_id == FLOOR_ID:
            # the floor is a first-class target: it affords exactly Vacuum
            if action != "Vacuum":
                return self._infeasible(
                    world, None, cond.no_such_affordance(action, "floor"))
            method = FLOOR_VACUUM
        else:
            inst = world.objects.get(object_id)
            if inst is None:
                raise UnknownObject(f"unknown object {object_id!r}")
            method = world.registry.find_method(inst.class_name, action)
        if method is None:
            return self._infeasible(
                world, None,
                cond.no_such_affordance(action, inst.class_name))
        if not isinstance(param, _PARAM_ACCEPTS[method.spatial_param]):
            raise ParamKindMismatch(
                f"{action} takes {method.spatial_param}, got {type(param).__name__}")
        if isinstance(param, LevelTarget) and not (0.0 <= param.level <= 1.0):
            raise ParamKindMismatch(f"level {param.level} outside [0, 1]")

        robots = [world.robot_specs[rid] for rid in world.robot_specs
                  if method.required_capabilities <= world.robot_specs[rid].capabilities]
        if not robots:
            return self._infeasible(world, None, cond.no_capable_robot(action))

        deepest: tuple[int, str, FailureCondition] | None = None
        for spec in robots:
            try:
                self._run_chain(world, spec, object_id, method, param)
                return FeasibilityVerdict(
                    feasible=True, explanation=None, checked_robot=spec.id,
                    evaluated_at_revision=world.revision)
            except _ChainFailure as failure:
                if deepest is None or failure.depth > deepest[0]:
                    deepest = (failure.depth, spec.id, failure.condition)
        assert deepest is not None
        return self._infeasible(world, deepest[1], deepest[2])

    def action_menu(self, world: WorldState, object_id: str) -> list[MenuEntry]:
        """One entry per effective method; absent actions simply never appear."""
        if object_id == FLOOR_ID:
            methods: tuple[ActionDescriptor, ...] = (FLOOR_VACUUM,)
        else:
            inst = world.objects.get(object_id)
            if inst is None:
                raise UnknownObject(f"unknown object {object_id!r}")
            methods = world.registry.effective_methods(inst.class_name)
        entries = []
        for method in methods:
            verdict = self.evaluate(world, object_id, method.name, None)
            if verdict.feasible:
                entries.append(MenuEntry(action=method, state="Available"))
            else:
                entries.append(MenuEntry(action=method, state="GrayedOut",
                                         explanation=verdict.explanation))
        return entries

    def explain(self, condition: FailureCondition) -> Explanation:
        return self.catalog.explain(condition)

    # -- chain dispatch -------------------------------------------------------

    def _infeasible(self, world: WorldState, robot_id: str | None,
                    condition: FailureCondition) -> FeasibilityVerdict:
        return FeasibilityVerdict(
            feasible=False, explanation=self.catalog.explain(condition),
            checked_robot=robot_id, evaluated_at_revision=world.revision)

    def _run_chain(self, world: WorldState, spec: XRobotSpec, object_id: str,
                   method: ActionDescriptor, param: SpatialParam) -> None:
        """Raises _ChainFailure on the first failing check."""
        if method.is_composite:
            self._composite_chain(world, spec, object_id, method, param)
        elif method.spatial_param == "AreaPolygon":
            self._vacuum_chain(world, spec, object_id, method, param)
        elif method.name == "Fill":
            self._fill_chain(world, spec, object_id, param)
        elif method.spatial_param == "PlacementPose":
            self._move_chain(world, spec, object_id, param)
        else:
            # generic fixture actions (levels, heights, parameterless):
            # the wand point must be reachable
            self._reach_chain(world, spec, object_id, depth_base=0)

    # -- move -----------------------------------------------------------------

    def _pick_subchain(self, world: WorldState, spec: XRobotSpec,
                       object_id: str, depth_base: int = 0) -> BasePoseSolution:
        memo_key = (world.token, world.revision, spec.id, object_id)
        hit = self._pick_memo.get(memo_key)
        if hit is not None:
            kind, payload = hit
            if kind == "ok":
                return payload
            raise _ChainFailure(payload[0], payload[1])
        try:
            solution = self._pick_subchain_uncached(world, spec, object_id,
                                                    depth_base)
        except _ChainFailure as failure:
            self._memo_put(memo_key, ("fail", (failure.depth, failure.condition)))
            raise
        self._memo_put(memo_key, ("ok", solution))
        return solution

    def _memo_put(self, key: tuple, value: tuple) -> None:
        if len(self._pick_memo) > 512:
            self._pick_memo.clear()
        self._pick_memo[key] = value

    def _pick_subchain_uncached(self, world: WorldState, spec: XRobotSpec,
                                object_id: str,
                                depth_base: int) -> BasePoseSolution:
        weight = world.effective_weight(object_id)
        if weight > spec.payload_max:
            raise _ChainFailure(depth_base + 1,
                                cond.too_heavy(weight, spec.payload_max))

        grasp = is_graspable(world, object_id, spec)
        if not grasp.ok:
            if grasp.reason == "TooWide":
                raise _ChainFailure(
                    depth_base + 2,
                    cond.gripper_too_narrow(grasp.min_width,
                                            spec.gripper_aperture_max))
            raise _ChainFailure(depth_base + 2,
                                cond.orientation_blocked(grasp.blocked_axis))

        occ = occlusion_check(world, object_id, include_drop_column=False)
        if not occ.clear:
            raise _ChainFailure(depth_base + 3,
                                cond.occluded_pick(list(occ.blockers)))

        try:
            return solve_base_pose(world, spec, grasp_point(world, object_id),
                                   ignore_ids=pick_exemptions(world, object_id),
                                   cache=self.cache)
        except HeightOutOfRangeError as exc:
            raise _ChainFailure(depth_base + 4,
                                cond.height_out_of_range(exc.z, exc.z_max)) from None
        except NoFreeBase:
            raise _ChainFailure(depth_base + 4,
                                cond.no_navigable_path(object_id)) from None
        except ArmBlocked as exc:
            raise _ChainFailure(depth_base + 4,
                                cond.occluded_pick(exc.blockers)) from None

    def resolve_placement(self, world: WorldState, object_id: str,
                          param: PlacementTarget) -> tuple[Pose, str | None]:
        """Concrete placement pose, binding container drops when applicable.

        Returns (pose, container_id). Raises _ChainFailure at depth 5 when the
        placement itself is invalid.
        """
        into = param.into
        pose = param.pose
        if into is None and pose is not None:
            into = self._bind_container(world, object_id, pose)
        if into is not None:
            return self._container_slot(world, object_id, into), into
        assert pose is not None
        result = placement_check(world, object_id, pose)
        if not result.ok:
            if result.unsupported:
                raise _ChainFailure(5, cond.placement_unsupported())
            raise _ChainFailure(5, cond.placement_collision(list(result.collisions)))
        return pose, None

    def _bind_container(self, world: WorldState, object_id: str,
                        pose: Pose) -> str | None:
        """A drop over an open container means 'put it inside'."""
        best: tuple[float, str] | None = None
        for oid in sorted(world.objects):
            if oid == object_id:
                continue
            if not world.intrinsic(oid).is_container:
                continue
            box = world.object_box(oid)
            interior = box.shrunk(CONTAINER_WALL, CONTAINER_WALL)
            if not interior.footprint_contains(pose.x, pose.y):
                continue
            if not (box.z0 - 0.05 <= pose.z <= box.z1 + 0.3):
                continue
            if best is None or box.z1 > best[0]:
                best = (box.z1, oid)
        return best[1] if best else None

    def _container_slot(self, world: WorldState, object_id: str,
                        container_id: str) -> Pose:
        """First free pose inside the container, scanning out from the center."""
        container = world.objects.get(container_id)
        if container is None:
            raise UnknownObject(f"unknown container {container_id!r}")
        inside = world.object(object_id)
        if inside.supported_by == container_id:
            # already in the container: nothing needs to drop through the
            # opening, the current pose satisfies the placement
            return inside.pose
        occ = occlusion_check(world, container_id)
        drop_blockers = [b for b in occ.blockers
                         if b not in world.object(container_id).contains
                         and b != object_id]
        if drop_blockers:
            raise _ChainFailure(5, cond.placement_collision(drop_blockers))

        box = world.object_box(container_id)
        interior = box.shrunk(CONTAINER_WALL, CONTAINER_WALL)
        step = 0.025
        nx = max(int(interior.half_w / step), 1)
        ny = max(int(interior.half_d / step), 1)
        offsets = sorted(
            ((math.hypot(ix * step, iy * step), ix * step, iy * step)
             for ix in range(-nx, nx + 1) for iy in range(-ny, ny + 1)),
            key=lambda t: (t[0], t[2], t[1]))
        c, s = math.cos(box.yaw), math.sin(box.yaw)
        collisions: set[str] = set()
        for _d, ox, oy in offsets:
            px = box.cx + c * ox - s * oy
            py = box.cy + s * ox + c * oy
            pose = Pose(px, py, interior.z0, box.yaw)
            result = placement_check(world, object_id, pose)
            if result.ok:
                return pose
            collisions.update(result.collisions)
        raise _ChainFailure(
            5, cond.placement_collision(sorted(collisions) or [container_id]))

    def _move_chain(self, world: WorldState, spec: XRobotSpec, object_id: str,
                    param: PlacementTarget | None) -> None:
        self._pick_subchain(world, spec, object_id)
        if param is None or (param.pose is None and param.into is None):
            return

        place_pose, container_id = self.resolve_placement(world, object_id, param)
        intr = world.intrinsic(object_id)
        release = (place_pose.x, place_pose.y, place_pose.z + intr.size[2] / 2.0)
        ignore = {object_id} | set(world.object(object_id).contains)
        if container_id is not None:
            ignore.add(container_id)
        support = world.resolve_support(object_id, pose=place_pose)
        if support is not None and support != FLOOR_ID:
            ignore.add(support)
        try:
            solve_base_pose(world, spec, release, ignore_ids=ignore,
                            cache=self.cache)
        except (HeightOutOfRangeError, NoFreeBase, ArmBlocked):
            raise _ChainFailure(6, cond.placement_unreachable(place_pose)) from None

    # -- vacuum ---------------------------------------------------------------

    def _vacuum_chain(self, world: WorldState, spec: XRobotSpec,
                      object_id: str, method: ActionDescriptor,
                      param: AreaTarget | None) -> None:
        if param is None:
            return  # capability pre-check only
        polygon = list(param.polygon)
        if len(polygon) < 3:
            raise ParamKindMismatch("area polygon needs at least 3 vertices")

        held = world.held_ids()
        obstructions = []
        for oid in sorted(world.objects):
            if oid == object_id or oid in held:
                continue
            box = world.object_box(oid)
            if box.z0 >= NAV_BLOCK_HEIGHT:
                continue  # sitting on furniture, not on the floor
            if polygon_intersects_footprint(polygon, box):
                obstructions.append(oid)
        if obstructions:
            raise _ChainFailure(1, cond.area_obstructed(obstructions))

        grid = self.cache.grid(world, spec)
        state = world.robot_states[spec.id]
        costs = self.cache.costs(
            world, spec, grid.cell_of(state.base_pose.x, state.base_pose.y))
        unreachable: list[tuple[int, int]] = []
        any_cell = False
        from ..geometry import point_in_polygon
        for cy in range(grid.height):
            for cx in range(grid.width):
                px, py = grid.center_of((cx, cy))
                if not point_in_polygon(px, py, polygon):
                    continue
                any_cell = True
                if grid.blocked[cy, cx] or not math.isfinite(costs[cy, cx]):
                    unreachable.append((cx, cy))
        if not any_cell:
            raise ParamKindMismatch("area polygon covers no grid cells")
        if unreachable:
            raise _ChainFailure(2, cond.area_unreachable(unreachable))

    # -- fill -----------------------------------------------------------------

    def find_dispenser(self, world: WorldState) -> str | None:
        for oid in sorted(world.objects):
            cls = world.objects[oid].class_name
            if world.registry.find_method(cls, "Dispense") is not None:
                return oid
        return None

    def _fill_chain(self, world: WorldState, spec: XRobotSpec, object_id: str,
                    param: LevelTarget | None) -> None:
        self._pick_subchain(world, spec, object_id)

        dispenser = self.find_dispenser(world)
        if dispenser is None:
            inst = world.object(object_id)
            raise _ChainFailure(
                5, cond.no_such_affordance("Fill", inst.class_name))
        dock = grasp_point(world, dispenser)
        try:
            solve_base_pose(world, spec, dock,
                            ignore_ids=pick_exemptions(world, dispenser),
                            cache=self.cache)
        except HeightOutOfRangeError as exc:
            raise _ChainFailure(6, cond.height_out_of_range(exc.z, exc.z_max)) \
                from None
        except (NoFreeBase, ArmBlocked):
            raise _ChainFailure(6, cond.no_navigable_path(dispenser)) from None

    # -- generic reach ----------------------------------------------------------

    def _reach_chain(self, world: WorldState, spec: XRobotSpec, object_id: str,
                     depth_base: int) -> None:
        try:
            solve_base_pose(world, spec, grasp_point(world, object_id),
                            ignore_ids=pick_exemptions(world, object_id),
                            cache=self.cache)
        except HeightOutOfRangeError as exc:
            raise _ChainFailure(depth_base + 1,
                                cond.height_out_of_range(exc.z, exc.z_max)) from None
        except NoFreeBase:
            raise _ChainFailure(depth_base + 1,
                                cond.no_navigable_path(object_id)) from None
        except ArmBlocked as exc:
            raise _ChainFailure(depth_base + 1,
                                cond.occluded_pick(exc.blockers)) from None

    # -- composite ----------------------------------------------------------------

    def _composite_chain(self, world: WorldState, spec: XRobotSpec,
                         object_id: str, method: ActionDescriptor,
                         param: SpatialParam) -> None:
        """Check substeps in order against a forward-simulated copy."""
        sim = world
        cls = world.object(object_id).class_name
        for i, sub_name in enumerate(method.substeps):
            sub = world.registry.find_method(cls, sub_name)
            assert sub is not None  # registry validated substeps at load
            sub_param = param if isinstance(param, _PARAM_ACCEPTS[sub.spatial_param]) \
                else None
            try:
                self._run_chain(sim, spec, object_id, sub, sub_param)
            except _ChainFailure as failure:
                raise _ChainFailure(i * 10 + failure.depth, failure.condition) \
                    from None
            sim = self._apply_effects(sim, object_id, sub, sub_param)

    def _apply_effects(self, world: WorldState, object_id: str,
                       method: ActionDescriptor,
                       param: SpatialParam) -> WorldState:
        """Declared effects of one primitive, applied to a copy."""
        if isinstance(param, PlacementTarget):
            pose, _container = self.resolve_placement(world, object_id, param)
            try:
                return apply_mutation(world, SetPose(object_id, pose))
            except InvariantViolation:
                raise _ChainFailure(5, cond.placement_collision([])) from None
        if isinstance(param, LevelTarget):
            return apply_mutation(world, SetFill(object_id, param.level))
        return world


# ---------------------------------------------------------------------------
# Signifier hit test

def signifier_hit(world: WorldState, origin: tuple[float, float, float],
                  direction: tuple[float, float, float]) -> str | None:
    """Nearest actionable object along a ray; statics and doors occlude."""
    from ..geometry import ray_box_distance

    norm = math.sqrt(sum(d * d for d in direction))
    if norm < 1e-12:
        raise ValueError("ray direction must be non-zero")
    direction = tuple(d / norm for d in direction)

    occluder = math.inf
    for s in world.statics:
        t = ray_box_distance(origin, direction, s.box)
        if t is not None:
            occluder = min(occluder, t)
    for d in world.doors:
        if not d.open:
            t = ray_box_distance(origin, direction, d.span)
            if t is not None:
                occluder = min(occluder, t)

    best: tuple[float, str] | None = None
    for oid in sorted(world.objects):
        inst = world.objects[oid]
        if not world.registry.effective_methods(inst.class_name):
            continue
        t = ray_box_distance(origin, direction, world.object_box(oid))
        if t is None:
            continue
        if best is None or t < best[0]:
            best = (t, oid)
    if best is None or best[0] >= occluder:
        return None
    return best[1]


# module-level conveniences sharing one engine ------------------------------

_shared_engine: FeasibilityEngine | None = None


def shared_engine() -> FeasibilityEngine:
    global _shared_engine
    if _shared_engine is None:
        _shared_engine = FeasibilityEngine(cache=shared_cache)
    return _shared_engine


def evaluate(world: WorldState, object_id: str, action: str,
             param: SpatialParam = None) -> FeasibilityVerdict:
    return shared_engine().evaluate(world, object_id, action, param)


def action_menu(world: WorldState, object_id: str) -> list[MenuEntry]:
    return shared_engine().action_menu(world, object_id)
