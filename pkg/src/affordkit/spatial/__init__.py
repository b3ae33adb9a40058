"""Geometric substrate: occupancy grid, path search, reach field, base IK."""

from .astar import find_path, octile, path_points
from .basepose import (ARM_CROSS_SECTION, IK_TOLERANCE, BasePoseSolution,
                       arm_sweep_blockers, solve_base_pose)
from .grid import (NAV_BLOCK_HEIGHT, RESOLUTION, Z_RESOLUTION, OccupancyGrid,
                   SpatialCache, build_grid, cost_field, descend_path,
                   shared_cache)
from .predicates import (GraspResult, OcclusionResult, PlacementResult,
                         grasp_width, is_graspable, occlusion_check,
                         placement_check)
from .reach import ReachField, build_reach_field, export_maps, grid_to_pgm

__all__ = [
    "ARM_CROSS_SECTION", "BasePoseSolution", "GraspResult", "IK_TOLERANCE",
    "NAV_BLOCK_HEIGHT", "OccupancyGrid", "OcclusionResult", "PlacementResult",
    "RESOLUTION", "ReachField", "SpatialCache", "Z_RESOLUTION",
    "arm_sweep_blockers", "build_grid", "build_reach_field", "cost_field",
    "descend_path", "export_maps", "find_path", "grasp_width", "grid_to_pgm",
    "is_graspable", "occlusion_check", "octile", "path_points",
    "placement_check", "shared_cache", "solve_base_pose",
]
