"""Reachability field: which points in space can the gripper attain.

A lattice point is reachable when some free base cell, path-connected to the
robot's current cell, lies within arm reach of it, the height is inside the
lift window, and the horizontal arm sweep from that base to the point is
collision free (boxes containing the point itself do not count — reaching
onto an object is the whole idea).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..world.state import WorldState, XRobotSpec
from .basepose import (ARM_CROSS_SECTION, GRIPPER_OFFSET_HI, GRIPPER_OFFSET_LO,
                       arm_sweep_blockers)
from .grid import Z_RESOLUTION, OccupancyGrid, SpatialCache, shared_cache


@dataclass
class ReachField:
    robot_id: str
    grid: OccupancyGrid
    z_levels: tuple[float, ...]
    slices: dict[float, np.ndarray]  # z -> bool (height, width)

    def reachable(self, x: float, y: float, z: float) -> bool:
        """Membership at the nearest lattice point."""
        best = min(self.z_levels, key=lambda zl: abs(zl - z), default=None)
        if best is None or abs(best - z) > Z_RESOLUTION / 2 + 1e-9:
            return False
        cx, cy = self.grid.cell_of(x, y)
        if not self.grid.in_bounds((cx, cy)):
            return False
        return bool(self.slices[best][cy, cx])


def _disk_offsets(radius_cells: float) -> list[tuple[float, int, int]]:
    r = int(math.ceil(radius_cells))
    out = []
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            d = math.hypot(dx, dy)
            out.append((d, dx, dy))
    out.sort()
    return out


def build_reach_field(world: WorldState, spec: XRobotSpec,
                      cache: SpatialCache | None = None) -> ReachField:
    cache = cache or shared_cache
    grid = cache.grid(world, spec)
    state = world.robot_states[spec.id]
    robot_cell = grid.cell_of(state.base_pose.x, state.base_pose.y)
    costs = cache.costs(world, spec, robot_cell)
    connected = np.isfinite(costs)

    z_lo = spec.lift_range[0] + GRIPPER_OFFSET_LO
    z_hi = spec.lift_range[1] + GRIPPER_OFFSET_HI
    k_lo = int(math.ceil((z_lo - 1e-9) / Z_RESOLUTION))
    k_hi = int(math.floor((z_hi + 1e-9) / Z_RESOLUTION))
    z_levels = tuple(round(k * Z_RESOLUTION, 9) for k in range(k_lo, k_hi + 1))

    reach_cells = spec.arm_extension_max / grid.resolution
    offsets = [(d, dx, dy) for d, dx, dy in _disk_offsets(reach_cells)
               if d * grid.resolution <= spec.arm_extension_max + 1e-9]

    solids = world.solid_boxes()
    slices: dict[float, np.ndarray] = {}
    for z in z_levels:
        plane = np.zeros((grid.height, grid.width), dtype=bool)
        for cy in range(grid.height):
            for cx in range(grid.width):
                px, py = grid.center_of((cx, cy))
                ignore = {sid for sid, box in solids
                          if box.contains_point(px, py, z, eps=1e-9)}
                ok = False
                for _d, dx, dy in offsets:
                    bx, by = cx + dx, cy + dy
                    if not (0 <= bx < grid.width and 0 <= by < grid.height):
                        continue
                    if not connected[by, bx]:
                        continue
                    base = grid.center_of((bx, by))
                    if math.hypot(base[0] - px, base[1] - py) > \
                            spec.arm_extension_max + 1e-9:
                        continue
                    if not arm_sweep_blockers(world, base, (px, py, z), ignore):
                        ok = True
                        break
                plane[cy, cx] = ok
        slices[z] = plane
    return ReachField(robot_id=spec.id, grid=grid, z_levels=z_levels,
                      slices=slices)


# ---------------------------------------------------------------------------
# Debug export (portable graymaps, diffable)

def grid_to_pgm(grid: OccupancyGrid) -> bytes:
    """P5 graymap: free = white, blocked = black, vacuum obstacles = gray."""
    img = np.full((grid.height, grid.width), 255, dtype=np.uint8)
    img[grid.vacuum_obstacles] = 128
    img[grid.blocked] = 0
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode()
    return header + img[::-1].tobytes()  # north up


def reach_slice_to_pgm(field: ReachField, z: float) -> bytes:
    plane = field.slices[z]
    img = np.where(plane, 255, 0).astype(np.uint8)
    header = f"P5\n{plane.shape[1]} {plane.shape[0]}\n255\n".encode()
    return header + img[::-1].tobytes()


def export_maps(world: WorldState, spec: XRobotSpec, out_dir: str,
                with_reach: bool = False) -> list[str]:
    """Write the grid (and optionally each reach slice) as .pgm files."""
    import os

    os.makedirs(out_dir, exist_ok=True)
    cache = SpatialCache()
    written = []
    grid = cache.grid(world, spec)
    path = os.path.join(out_dir, f"grid_{spec.id}.pgm")
    with open(path, "wb") as fh:
        fh.write(grid_to_pgm(grid))
    written.append(path)
    if with_reach:
        field = build_reach_field(world, spec, cache=cache)
        for z in field.z_levels:
            path = os.path.join(out_dir, f"reach_{spec.id}_z{z:0.2f}.pgm")
            with open(path, "wb") as fh:
                fh.write(reach_slice_to_pgm(field, z))
            written.append(path)
    return written
