"""Scene file loading and validation.

A scene document is a single JSON object with sections `classes`, `objects`,
`robots`, `static` and `doors`, versioned by a top-level `format: 1` field.
Lengths are meters, masses kilograms, angles radians. Robot specs may live in
a separate file referenced by `spec_file`.

Class generation is pluggable: the engine only ever consumes class documents,
so anything able to produce them (hand-authored files today, a vision model
upstream) can feed the loader.
"""

from __future__ import annotations

import json
import math
import os
import uuid
from typing import Callable, Iterable

from ..errors import Interpenetration, SchemaError, SupportCycle, UnknownEntity
from ..geometry import Box, Pose, penetration_depth
from .schema import (ActionDescriptor, ClassRegistry, Intrinsic, XObjectClass,
                     DEFAULT_CAPABILITIES)
from .state import (PEN_TOL, Door, RobotState, StaticElement, WorldState,
                    XObjectInstance, XRobotSpec)

SCENE_FORMAT = 1

# Mirrors the future upstream generator: anything that turns scene captures or
# descriptions into class documents. The shipped implementation reads files.
ClassGenerator = Callable[[Iterable[str]], list[dict]]


def generate_classes_from_files(paths: Iterable[str]) -> list[dict]:
    """File-backed class generator: each path holds a JSON list of classes."""
    out: list[dict] = []
    for path in paths:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if not isinstance(doc, list):
            raise SchemaError(f"{path}: class document must be a list")
        out.extend(doc)
    return out


def _require(record: dict, key: str, ctx: str):
    if key not in record:
        raise SchemaError(f"{ctx}: missing field {key!r}")
    return record[key]


def _floats(value, n: int, ctx: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise SchemaError(f"{ctx}: expected {n} numbers, got {value!r}")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise SchemaError(f"{ctx}: expected numbers, got {value!r}") from None


def _parse_action(record: dict, ctx: str) -> ActionDescriptor:
    name = _require(record, "name", ctx)
    caps = record.get("required_capabilities")
    if caps is None:
        caps = DEFAULT_CAPABILITIES.get(name, set())
    return ActionDescriptor(
        name=name,
        spatial_param=record.get("spatial_param", "None"),
        substeps=tuple(record.get("substeps", ())),
        required_capabilities=frozenset(caps),
    )


def parse_classes(records: list[dict]) -> ClassRegistry:
    """Build a registry from raw class records, resolving intrinsic inheritance."""
    raw: dict[str, dict] = {}
    order: list[str] = []
    for rec in records:
        name = _require(rec, "class_name", "class")
        if name in raw:
            raise SchemaError(f"duplicate class {name!r}")
        raw[name] = rec
        order.append(name)

    # Resolve intrinsic fields through the parent chain before type checks so
    # children may override single attributes.
    INTRINSIC_FIELDS = ("size", "weight", "graspable", "grasp_axes", "stackable",
                        "is_container", "is_support_surface", "fillable")

    def resolved_intrinsic(name: str, seen: tuple[str, ...] = ()) -> dict:
        if name in seen:
            # cycle; let ClassRegistry raise the canonical error
            return {}
        rec = raw[name]
        own = dict(rec.get("intrinsic", {}))
        parent = rec.get("parent")
        if parent is not None and parent in raw:
            merged = resolved_intrinsic(parent, seen + (name,))
            merged.update(own)
            return merged
        return own

    classes = []
    for name in order:
        rec = raw[name]
        intr_rec = resolved_intrinsic(name)
        ctx = f"class {name!r}"
        size = _floats(_require(intr_rec, "size", ctx), 3, ctx)
        intrinsic = Intrinsic(
            size=size,
            weight=float(_require(intr_rec, "weight", ctx)),
            graspable=bool(intr_rec.get("graspable", True)),
            grasp_axes=frozenset(intr_rec.get("grasp_axes",
                                              ("FromTop", "AlongWidth", "AlongDepth"))),
            stackable=bool(intr_rec.get("stackable", False)),
            is_container=bool(intr_rec.get("is_container", False)),
            is_support_surface=bool(intr_rec.get("is_support_surface", False)),
            fillable=bool(intr_rec.get("fillable", False)),
        )
        methods = tuple(_parse_action(m, ctx) for m in rec.get("methods", ()))
        classes.append(XObjectClass(
            class_name=name,
            parent=rec.get("parent"),
            intrinsic=intrinsic,
            methods=methods,
            extra=dict(rec.get("extra", {})),
        ))
    return ClassRegistry(classes)


def _parse_pose(record: dict, ctx: str) -> Pose:
    for key in ("x", "y"):
        _require(record, key, ctx)
    try:
        return Pose.from_dict(record)
    except (TypeError, ValueError):
        raise SchemaError(f"{ctx}: bad pose {record!r}") from None


def _parse_box(record: dict, ctx: str) -> Box:
    center = _floats(_require(record, "center", ctx), 2, ctx)
    size = _floats(_require(record, "size", ctx), 2, ctx)
    z = _floats(_require(record, "z", ctx), 2, ctx)
    yaw = float(record.get("yaw", 0.0))
    return Box(center[0], center[1], size[0] / 2.0, size[1] / 2.0, yaw, z[0], z[1])


def _parse_robot_spec(record: dict, ctx: str) -> XRobotSpec:
    lift = _floats(_require(record, "lift_range", ctx), 2, ctx)
    return XRobotSpec(
        id=_require(record, "id", ctx),
        capabilities=frozenset(_require(record, "capabilities", ctx)),
        payload_max=float(_require(record, "payload_max", ctx)),
        gripper_aperture_max=float(_require(record, "gripper_aperture_max", ctx)),
        lift_range=lift,
        arm_extension_max=float(_require(record, "arm_extension_max", ctx)),
        base_footprint_radius=float(_require(record, "base_footprint_radius", ctx)),
        nav_speed=float(record.get("nav_speed", 0.5)),
        lift_speed=float(record.get("lift_speed", 0.2)),
        arm_speed=float(record.get("arm_speed", 0.2)),
    )


def load_scene(document: str | dict, base_dir: str | None = None) -> WorldState:
    """Parse and validate a scene document into a WorldState at revision 0.

    `document` may be raw JSON text or an already-decoded dict; `base_dir`
    anchors relative `spec_file` references.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"scene is not valid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, dict):
        raise SchemaError("scene document must be a JSON object")
    if doc.get("format") != SCENE_FORMAT:
        raise SchemaError(f"unsupported scene format {doc.get('format')!r}")

    registry = parse_classes(doc.get("classes", []))

    bounds_rec = doc.get("bounds")
    if bounds_rec is None:
        raise SchemaError("scene: missing field 'bounds'")
    bounds = _floats(bounds_rec, 4, "bounds")

    statics = []
    for rec in doc.get("static", []):
        ctx = f"static {rec.get('id')!r}"
        statics.append(StaticElement(
            id=_require(rec, "id", ctx),
            box=_parse_box(rec, ctx),
            blocks_navigation=bool(rec.get("blocks_navigation", True)),
            support_surface=bool(rec.get("support_surface", False)),
        ))

    doors = []
    for rec in doc.get("doors", []):
        ctx = f"door {rec.get('id')!r}"
        doors.append(Door(
            id=_require(rec, "id", ctx),
            open=bool(rec.get("open", False)),
            span=_parse_box(_require(rec, "span", ctx), ctx),
        ))

    objects: dict[str, XObjectInstance] = {}
    for rec in doc.get("objects", []):
        ctx = f"object {rec.get('id')!r}"
        oid = _require(rec, "id", ctx)
        cls = _require(rec, "class", ctx)
        if cls not in registry:
            registry.get(cls)  # raises UnknownClass
        if oid in objects:
            raise SchemaError(f"duplicate object id {oid!r}")
        objects[oid] = XObjectInstance(
            id=oid,
            class_name=cls,
            pose=_parse_pose(_require(rec, "pose", ctx), ctx),
            color_state=rec.get("color_state", "Normal"),
            fill_level=float(rec.get("fill_level", 0.0)),
        )

    robot_specs: dict[str, XRobotSpec] = {}
    robot_states: dict[str, RobotState] = {}
    for rec in doc.get("robots", []):
        if "spec_file" in rec:
            path = rec["spec_file"]
            if base_dir is not None and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            with open(path, "r", encoding="utf-8") as fh:
                spec_rec = json.load(fh)
        else:
            spec_rec = _require(rec, "spec", "robot")
        spec = _parse_robot_spec(spec_rec, f"robot spec {spec_rec.get('id')!r}")
        state_rec = rec.get("state", {})
        pose = _parse_pose(_require(state_rec, "base_pose", f"robot {spec.id!r}"),
                           f"robot {spec.id!r}")
        robot_specs[spec.id] = spec
        robot_states[spec.id] = RobotState(
            robot_id=spec.id,
            base_pose=pose,
            lift_z=float(state_rec.get("lift_z", spec.lift_range[0])),
            arm_ext=float(state_rec.get("arm_ext", 0.0)),
            battery=float(state_rec.get("battery", 1.0)),
            phase=state_rec.get("phase", "Idle"),
        )

    world = WorldState(
        registry=registry,
        statics=tuple(statics),
        doors=tuple(doors),
        objects=objects,
        robot_specs=robot_specs,
        robot_states=robot_states,
        bounds=bounds,
        revision=0,
        token=uuid.uuid4().hex,
    )

    _resolve_initial_relations(world)
    _check_initial_overlap(world)
    world.check_support_acyclic()
    return world


def _resolve_initial_relations(world: WorldState) -> None:
    """Fill in supported_by and container contents from geometry."""
    from dataclasses import replace

    for oid in sorted(world.objects):
        support = world.resolve_support(oid)
        world.objects[oid] = replace(world.objects[oid], supported_by=support)
    for oid in sorted(world.objects):
        inst = world.objects[oid]
        if inst.supported_by in world.objects:
            parent = world.objects[inst.supported_by]
            intr = world.registry.effective_intrinsic(parent.class_name)
            if intr.is_container and oid not in parent.contains:
                world.objects[inst.supported_by] = replace(
                    parent, contains=tuple(sorted(parent.contains + (oid,))))


def _check_initial_overlap(world: WorldState) -> None:
    """Objects must not be embedded in anything; statics may abut freely."""
    solids = world.solid_boxes()
    for oid in sorted(world.objects):
        abox = world.object_box(oid)
        for bid, bbox in solids:
            if bid == oid:
                continue
            depth = penetration_depth(abox, bbox)
            if depth > PEN_TOL:
                if world._inside_container(abox, bid, bbox):
                    continue
                if world._inside_container(bbox, oid, abox):
                    continue
                raise Interpenetration(
                    f"{oid} and {bid} overlap by {depth * 1000:.1f} mm")


def load_scene_file(path: str) -> WorldState:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return load_scene(text, base_dir=os.path.dirname(os.path.abspath(path)))
