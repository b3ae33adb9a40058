"""Object-oriented world model: classes, instances, robots, scene state."""

from .loader import (generate_classes_from_files, load_scene, load_scene_file,
                     parse_classes)
from .schema import (ActionDescriptor, ClassRegistry, Intrinsic, XObjectClass,
                     GRASP_AXES)
from .state import (PEN_TOL, SUPPORT_GAP, CONTAINER_WALL, FLOOR_ID,
                    AttachSupport, DetachSupport, Door, Mutation, RobotState,
                    SetColorState, SetDoor, SetFill, SetHolding, SetPose,
                    SetRobotPhase, SetRobotPose, StaticElement, WorldState,
                    XObjectInstance, XRobotSpec, apply_mutation,
                    changed_entities, mutation_from_dict, mutation_to_dict)

__all__ = [
    "ActionDescriptor", "AttachSupport", "ClassRegistry", "CONTAINER_WALL",
    "DetachSupport", "Door", "FLOOR_ID", "GRASP_AXES", "Intrinsic", "Mutation",
    "PEN_TOL", "RobotState", "SetColorState", "SetDoor", "SetFill",
    "SetHolding", "SetPose", "SetRobotPhase", "SetRobotPose", "StaticElement",
    "SUPPORT_GAP", "WorldState", "XObjectClass", "XObjectInstance",
    "XRobotSpec", "apply_mutation", "changed_entities",
    "generate_classes_from_files", "load_scene", "load_scene_file",
    "mutation_from_dict", "mutation_to_dict", "parse_classes",
]
