"""Object and robot class definitions.

Object classes carry immutable intrinsic attributes and a method list naming
the actions instances of the class afford. Classes may inherit: methods merge
child-first with name override, intrinsic fields fall back to the parent when
a child omits them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InheritanceCycle, SchemaError, UnknownClass

GRASP_AXES = ("FromTop", "AlongWidth", "AlongDepth")
SPATIAL_PARAM_KINDS = ("None", "PlacementPose", "AreaPolygon", "ScalarLevel", "Height")

# Capability sets assumed for the built-in action names when a class file
# does not spell them out.
DEFAULT_CAPABILITIES = {
    "Move": {"navigate", "pick", "place"},
    "Fetch": {"navigate", "pick", "place"},
    "Stack": {"navigate", "pick", "place"},
    "Fill": {"navigate", "pick", "place", "dispense-fill"},
    "Vacuum": {"navigate", "vacuum"},
}


@dataclass(frozen=True)
class ActionDescriptor:
    name: str
    spatial_param: str = "None"
    substeps: tuple[str, ...] = ()
    required_capabilities: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.spatial_param not in SPATIAL_PARAM_KINDS:
            raise SchemaError(
                f"action {self.name!r}: unknown spatial_param {self.spatial_param!r}")

    @property
    def is_composite(self) -> bool:
        return bool(self.substeps)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "spatial_param": self.spatial_param,
            "substeps": list(self.substeps),
            "required_capabilities": sorted(self.required_capabilities),
        }


@dataclass(frozen=True)
class Intrinsic:
    """Immutable physical attributes of an object class."""

    size: tuple[float, float, float]  # width, depth, height in meters
    weight: float                     # kilograms
    graspable: bool = True
    grasp_axes: frozenset[str] = frozenset(GRASP_AXES)
    stackable: bool = False
    is_container: bool = False
    is_support_surface: bool = False
    fillable: bool = False

    def __post_init__(self) -> None:
        if any(s <= 0.0 for s in self.size):
            raise SchemaError(f"size components must be > 0, got {self.size}")
        if self.weight < 0.0:
            raise SchemaError(f"weight must be >= 0, got {self.weight}")
        bad = self.grasp_axes - set(GRASP_AXES)
        if bad:
            raise SchemaError(f"unknown grasp axes {sorted(bad)}")

    def to_dict(self) -> dict:
        return {
            "size": list(self.size),
            "weight": self.weight,
            "graspable": self.graspable,
            "grasp_axes": sorted(self.grasp_axes),
            "stackable": self.stackable,
            "is_container": self.is_container,
            "is_support_surface": self.is_support_surface,
            "fillable": self.fillable,
        }


@dataclass(frozen=True)
class XObjectClass:
    class_name: str
    parent: str | None
    intrinsic: Intrinsic
    methods: tuple[ActionDescriptor, ...]
    extra: dict = field(default_factory=dict, compare=False)


class ClassRegistry:
    """Resolved set of object classes with inheritance applied."""

    def __init__(self, classes: list[XObjectClass]):
        self._classes: dict[str, XObjectClass] = {}
        for cls in classes:
            if cls.class_name in self._classes:
                raise SchemaError(f"duplicate class {cls.class_name!r}")
            self._classes[cls.class_name] = cls
        self._check_parents()
        self._effective_cache: dict[str, tuple[ActionDescriptor, ...]] = {}
        for name in self._classes:
            self._validate_class(name)

    def _check_parents(self) -> None:
        for cls in self._classes.values():
            if cls.parent is not None and cls.parent not in self._classes:
                raise UnknownClass(
                    f"class {cls.class_name!r} inherits unknown {cls.parent!r}")
        # cycle detection by walking parent chains
        for name in self._classes:
            seen = set()
            cur: str | None = name
            while cur is not None:
                if cur in seen:
                    raise InheritanceCycle(f"inheritance cycle through {cur!r}")
                seen.add(cur)
                cur = self._classes[cur].parent

    def _validate_class(self, name: str) -> None:
        cls = self._classes[name]
        methods = {m.name for m in self.effective_methods(name)}
        intr = cls.intrinsic
        if intr.fillable and "Fill" not in methods:
            raise SchemaError(f"class {name!r} is fillable but lacks Fill")
        if not intr.graspable and "Move" in methods:
            raise SchemaError(f"class {name!r} is not graspable but has Move")
        for m in self.effective_methods(name):
            self._check_substeps(name, m, ())

    def _check_substeps(self, cls_name: str, method: ActionDescriptor,
                        stack: tuple[str, ...]) -> None:
        if method.name in stack:
            raise SchemaError(
                f"class {cls_name!r}: recursive substeps through {method.name!r}")
        for sub in method.substeps:
            target = self.find_method(cls_name, sub)
            if target is None:
                raise SchemaError(
                    f"class {cls_name!r}: substep {sub!r} of {method.name!r} undefined")
            self._check_substeps(cls_name, target, stack + (method.name,))

    def __contains__(self, name: str) -> bool:
        return name in self._classes

    def get(self, name: str) -> XObjectClass:
        try:
            return self._classes[name]
        except KeyError:
            raise UnknownClass(f"unknown class {name!r}") from None

    def names(self) -> list[str]:
        return sorted(self._classes)

    def effective_intrinsic(self, name: str) -> Intrinsic:
        # intrinsics are fully resolved at load time (see loader), so the
        # stored intrinsic is already effective
        return self.get(name).intrinsic

    def effective_methods(self, name: str) -> tuple[ActionDescriptor, ...]:
        """Own methods first, then inherited ones not overridden by name."""
        cached = self._effective_cache.get(name)
        if cached is not None:
            return cached
        cls = self.get(name)
        own = list(cls.methods)
        seen = {m.name for m in own}
        if cls.parent is not None:
            for m in self.effective_methods(cls.parent):
                if m.name not in seen:
                    own.append(m)
                    seen.add(m.name)
        result = tuple(own)
        self._effective_cache[name] = result
        return result

    def find_method(self, cls_name: str, action: str) -> ActionDescriptor | None:
        for m in self.effective_methods(cls_name):
            if m.name == action:
                return m
        return None
