"""Exception types raised across the engine."""


class AffordkitError(Exception):
    """Base class for all engine errors."""


class SchemaError(AffordkitError):
    """Scene or class document is malformed (missing field, wrong type)."""


class InheritanceCycle(SchemaError):
    """Class inheritance graph contains a cycle."""


class UnknownClass(AffordkitError):
    """Referenced object class is not in the registry."""


class UnknownEntity(AffordkitError):
    """Mutation or query references an id that does not exist."""


class SupportCycle(AffordkitError):
    """Support relations form a cycle instead of terminating at the floor."""


class Interpenetration(AffordkitError):
    """Initial scene has solids overlapping beyond tolerance."""


class InvariantViolation(AffordkitError):
    """A mutation would leave the world in an invalid state."""


class CellBlocked(AffordkitError):
    """Path query start or goal cell is blocked."""


class HeightOutOfRangeError(AffordkitError):
    """Requested grasp height is outside the lift window."""

    def __init__(self, z: float, z_min: float, z_max: float):
        super().__init__(f"height {z:.3f} outside [{z_min:.3f}, {z_max:.3f}]")
        self.z = z
        self.z_min = z_min
        self.z_max = z_max


class NoFreeBase(AffordkitError):
    """No free, connected base cell exists within arm reach of the target."""


class ArmBlocked(AffordkitError):
    """Every candidate base pose has the arm sweep colliding with a solid."""

    def __init__(self, blockers: list[str]):
        super().__init__(f"arm blocked by {blockers}")
        self.blockers = blockers


class UnknownObject(AffordkitError):
    """Feasibility query names an object that is not in the world."""


class ParamKindMismatch(AffordkitError):
    """Spatial parameter does not match the action's declared kind."""


class StalePlan(AffordkitError):
    """Plan was built against an older world revision."""


class Preempted(AffordkitError):
    """Execution was cancelled by the user."""


class UnknownPlan(AffordkitError):
    """Preempt names a plan id that is not running."""


class NotDragging(AffordkitError):
    """Drag sample arrived without an active drag."""


class ScenarioParseError(AffordkitError):
    """Replay scenario file is malformed."""


class SceneLoadError(AffordkitError):
    """Scene file could not be loaded at service startup."""
