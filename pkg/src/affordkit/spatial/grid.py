"""Occupancy grid construction and the navigation cost field.

The grid rasterizes navigation-blocking geometry at a fixed resolution and
dilates it by the robot's footprint radius, so path queries can treat the
robot as a point. Floor-standing objects always block; those shorter than
NAV_BLOCK_HEIGHT are additionally marked as vacuum obstacles.
"""

from __future__ import annotations

import heapq
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Box
from ..world.state import WorldState, XRobotSpec

RESOLUTION = 0.05        # meters per cell
Z_RESOLUTION = 0.05      # vertical lattice step for reach sampling
NAV_BLOCK_HEIGHT = 0.10  # objects shorter than this are vacuum obstacles

SQRT2 = math.sqrt(2.0)


@dataclass
class OccupancyGrid:
    origin: tuple[float, float]
    resolution: float
    width: int   # cells along x
    height: int  # cells along y
    blocked: np.ndarray          # bool, shape (height, width)
    vacuum_obstacles: np.ndarray  # bool, same shape
    inflation_radius: float

    def in_bounds(self, cell: tuple[int, int]) -> bool:
        cx, cy = cell
        return 0 <= cx < self.width and 0 <= cy < self.height

    def is_free(self, cell: tuple[int, int]) -> bool:
        cx, cy = cell
        return self.in_bounds(cell) and not self.blocked[cy, cx]

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor((x - self.origin[0]) / self.resolution)),
                int(math.floor((y - self.origin[1]) / self.resolution)))

    def center_of(self, cell: tuple[int, int]) -> tuple[float, float]:
        cx, cy = cell
        return (self.origin[0] + (cx + 0.5) * self.resolution,
                self.origin[1] + (cy + 0.5) * self.resolution)

    def to_bytes(self) -> bytes:
        return self.blocked.tobytes() + self.vacuum_obstacles.tobytes()


def _rasterize(grid_blocked: np.ndarray, origin: tuple[float, float],
               res: float, box: Box) -> np.ndarray:
    """Mark cells whose center lies inside the box footprint. Returns the mask."""
    h, w = grid_blocked.shape
    r = box.bounding_radius()
    x0 = max(int((box.cx - r - origin[0]) / res) - 1, 0)
    x1 = min(int((box.cx + r - origin[0]) / res) + 2, w)
    y0 = max(int((box.cy - r - origin[1]) / res) - 1, 0)
    y1 = min(int((box.cy + r - origin[1]) / res) + 2, h)
    if x0 >= x1 or y0 >= y1:
        return np.zeros_like(grid_blocked)
    xs = origin[0] + (np.arange(x0, x1) + 0.5) * res
    ys = origin[1] + (np.arange(y0, y1) + 0.5) * res
    gx, gy = np.meshgrid(xs, ys)
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    dx, dy = gx - box.cx, gy - box.cy
    lx = c * dx + s * dy
    ly = -s * dx + c * dy
    inside = (np.abs(lx) <= box.half_w) & (np.abs(ly) <= box.half_d)
    mask = np.zeros_like(grid_blocked)
    mask[y0:y1, x0:x1] = inside
    grid_blocked[y0:y1, x0:x1] |= inside
    return mask


def _dilate(mask: np.ndarray, radius_cells: float) -> np.ndarray:
    """Disk dilation by shifting the mask over every offset within the radius."""
    if radius_cells <= 0.0:
        return mask.copy()
    r = int(math.floor(radius_cells))
    out = mask.copy()
    h, w = mask.shape
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx == 0 and dy == 0:
                continue
            if math.hypot(dx, dy) > radius_cells:
                continue
            src_y0, src_y1 = max(0, -dy), min(h, h - dy)
            src_x0, src_x1 = max(0, -dx), min(w, w - dx)
            out[src_y0 + dy:src_y1 + dy, src_x0 + dx:src_x1 + dx] |= \
                mask[src_y0:src_y1, src_x0:src_x1]
    return out


def build_grid(world: WorldState, robot_spec: XRobotSpec) -> OccupancyGrid:
    """Deterministic occupancy grid for one robot footprint.

    Blocking solids: statics flagged blocks_navigation, closed door spans,
    and all floor-standing objects. Open doors leave their span free. Held
    objects do not block (they travel with the gripper).
    """
    x0, y0, x1, y1 = world.bounds
    res = RESOLUTION
    width = max(int(round((x1 - x0) / res)), 1)
    height = max(int(round((y1 - y0) / res)), 1)
    blocked = np.zeros((height, width), dtype=bool)
    vacuum = np.zeros((height, width), dtype=bool)
    origin = (x0, y0)

    for s in world.statics:
        if s.blocks_navigation:
            _rasterize(blocked, origin, res, s.box)
    for d in world.doors:
        if not d.open:
            _rasterize(blocked, origin, res, d.span)

    held = world.held_ids()
    for oid in sorted(world.objects):
        if oid in held:
            continue
        box = world.object_box(oid)
        if box.z0 > NAV_BLOCK_HEIGHT:
            continue  # off the floor (on a shelf or table)
        mask = _rasterize(blocked, origin, res, box)
        if box.height < NAV_BLOCK_HEIGHT:
            vacuum |= mask

    inflated = _dilate(blocked, robot_spec.base_footprint_radius / res)
    return OccupancyGrid(
        origin=origin, resolution=res, width=width, height=height,
        blocked=inflated, vacuum_obstacles=vacuum,
        inflation_radius=robot_spec.base_footprint_radius,
    )


def cost_field(grid: OccupancyGrid, seed: tuple[int, int]) -> np.ndarray:
    """Octile-distance cost (in meters) from `seed` to every free cell.

    Unreachable or blocked cells hold +inf. Corner cutting is forbidden:
    a diagonal move needs both adjacent orthogonal cells free. The seed cell
    itself is always expandable so a robot boxed in by inflation can still
    report costs from where it stands.
    """
    h, w = grid.height, grid.width
    dist = np.full((h, w), np.inf)
    sx, sy = seed
    if not grid.in_bounds(seed):
        return dist
    dist[sy, sx] = 0.0
    heap: list[tuple[float, int, int]] = [(0.0, sx, sy)]
    blocked = grid.blocked
    while heap:
        d, cx, cy = heapq.heappop(heap)
        if d > dist[cy, cx]:
            continue
        for dx, dy, step in _NEIGHBORS:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0:
                if blocked[cy, cx + dx] or blocked[cy + dy, cx]:
                    continue
            nd = d + step
            if nd < dist[ny, nx]:
                dist[ny, nx] = nd
                heapq.heappush(heap, (nd, nx, ny))
    return dist * grid.resolution


_NEIGHBORS = [
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
]


def descend_path(grid: OccupancyGrid, costs: np.ndarray,
                 cell: tuple[int, int]) -> list[tuple[int, int]]:
    """Optimal path from the cost-field seed to `cell` by gradient descent.

    `costs` must come from cost_field on the same grid. The returned path
    starts at the seed and ends at `cell`; raises ValueError when the cell is
    unreachable.
    """
    cx, cy = cell
    if not grid.in_bounds(cell) or not math.isfinite(costs[cy, cx]):
        raise ValueError(f"cell {cell} unreachable in cost field")
    res = grid.resolution
    blocked = grid.blocked
    path = [cell]
    cur = cell
    while costs[cur[1], cur[0]] > 1e-12:
        ccx, ccy = cur
        best: tuple[float, int, int] | None = None
        for dx, dy, step in _NEIGHBORS:
            nx, ny = ccx + dx, ccy + dy
            if not (0 <= nx < grid.width and 0 <= ny < grid.height):
                continue
            nd = costs[ny, nx]
            if not math.isfinite(nd):
                continue
            if dx != 0 and dy != 0:
                if blocked[ccy, ccx + dx] or blocked[ccy + dy, ccx]:
                    continue
            if nd + step * res <= costs[ccy, ccx] + 1e-9:
                cand = (nd, ny, nx)
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise ValueError(f"cost field inconsistent at {cur}")
        cur = (best[2], best[1])
        path.append(cur)
    path.reverse()
    return path


class SpatialCache:
    """Per-(revision, robot) cache of grids and cost fields.

    Snapshots are immutable, so entries never go stale; old revisions are
    evicted once enough newer ones accumulate. Thread-safe.
    """

    def __init__(self, max_revisions: int = 4):
        self._lock = threading.Lock()
        self._grids: dict[tuple, OccupancyGrid] = {}
        self._fields: dict[tuple, np.ndarray] = {}
        self._max_revisions = max_revisions

    def grid(self, world: WorldState, spec: XRobotSpec) -> OccupancyGrid:
        key = (world.token, world.revision, spec.id)
        with self._lock:
            hit = self._grids.get(key)
        if hit is not None:
            return hit
        grid = build_grid(world, spec)
        with self._lock:
            self._grids[key] = grid
            self._evict(world.revision)
        return grid

    def costs(self, world: WorldState, spec: XRobotSpec,
              seed: tuple[int, int]) -> np.ndarray:
        key = (world.token, world.revision, spec.id, seed)
        with self._lock:
            hit = self._fields.get(key)
        if hit is not None:
            return hit
        field_ = cost_field(self.grid(world, spec), seed)
        with self._lock:
            self._fields[key] = field_
            self._evict(world.revision)
        return field_

    def _evict(self, current: int) -> None:
        floor = current - self._max_revisions
        for key in [k for k in self._grids if k[1] < floor]:
            del self._grids[key]
        for key in [k for k in self._fields if k[1] < floor]:
            del self._fields[key]
        # hard cap across lineages (insertion order = oldest first)
        for store in (self._grids, self._fields):
            while len(store) > 64:
                store.pop(next(iter(store)))


shared_cache = SpatialCache()
