"""A* path search over the occupancy grid.

8-connected with octile-distance heuristic; diagonal moves are forbidden when
either adjacent orthogonal cell is blocked, so paths never cut corners.
Costs are reported in meters.
"""

from __future__ import annotations

import heapq
import math

from ..errors import CellBlocked
from .grid import SQRT2, OccupancyGrid

Cell = tuple[int, int]


def octile(a: Cell, b: Cell) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return max(dx, dy) + (SQRT2 - 1.0) * min(dx, dy)


def find_path(grid: OccupancyGrid, start: Cell,
              goal: Cell) -> tuple[list[Cell], float] | None:
    """Minimal-cost path from start to goal, or None when disconnected.

    Raises CellBlocked when either endpoint is out of bounds or blocked.
    Ties between equal-cost paths break deterministically on (f, h, y, x).
    """
    if not grid.in_bounds(start) or not grid.in_bounds(goal):
        raise CellBlocked(f"cell out of bounds: {start} or {goal}")
    if grid.blocked[start[1], start[0]]:
        raise CellBlocked(f"start {start} is blocked")
    if grid.blocked[goal[1], goal[0]]:
        raise CellBlocked(f"goal {goal} is blocked")
    if start == goal:
        return [start], 0.0

    blocked = grid.blocked
    w, h = grid.width, grid.height
    g: dict[Cell, float] = {start: 0.0}
    came: dict[Cell, Cell] = {}
    h0 = octile(start, goal)
    open_heap: list[tuple[float, float, int, int]] = [(h0, h0, start[1], start[0])]
    closed: set[Cell] = set()

    while open_heap:
        f, _, cy, cx = heapq.heappop(open_heap)
        cur = (cx, cy)
        if cur in closed:
            continue
        closed.add(cur)
        if cur == goal:
            path = [cur]
            while cur in came:
                cur = came[cur]
                path.append(cur)
            path.reverse()
            return path, g[goal] * grid.resolution
        base = g[cur]
        for dx, dy, step in _MOVES:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
                continue
            if dx != 0 and dy != 0:
                if blocked[cy, cx + dx] or blocked[cy + dy, cx]:
                    continue
            nb = (nx, ny)
            tentative = base + step
            if tentative < g.get(nb, math.inf):
                g[nb] = tentative
                came[nb] = cur
                hn = octile(nb, goal)
                heapq.heappush(open_heap, (tentative + hn, hn, ny, nx))
    return None


_MOVES = [
    (1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
    (1, 1, SQRT2), (1, -1, SQRT2), (-1, 1, SQRT2), (-1, -1, SQRT2),
]


def path_points(grid: OccupancyGrid, path: list[Cell]) -> list[tuple[float, float]]:
    return [grid.center_of(c) for c in path]
