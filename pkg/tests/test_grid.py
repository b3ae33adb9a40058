"""Occupancy grid construction and path search with independent oracles."""

import math
import random

import numpy as np
import pytest

from affordkit.errors import CellBlocked
from affordkit.geometry import Pose
from affordkit.spatial import (NAV_BLOCK_HEIGHT, RESOLUTION, build_grid,
                               cost_field, descend_path, find_path, octile)
from affordkit.spatial.grid import OccupancyGrid
from affordkit.world import SetDoor, SetPose, apply_mutation

from conftest import MOVER_SPEC, build_scene


def walled_room(extra_statics=None, objects=None, doors=None, size=5.0):
    statics = [
        {"id": "wn", "center": [size / 2, size - 0.05], "size": [size, 0.1], "z": [0, 2]},
        {"id": "ws", "center": [size / 2, 0.05], "size": [size, 0.1], "z": [0, 2]},
        {"id": "ww", "center": [0.05, size / 2], "size": [0.1, size], "z": [0, 2]},
        {"id": "we", "center": [size - 0.05, size / 2], "size": [0.1, size], "z": [0, 2]},
    ] + (extra_statics or [])
    return build_scene(statics=statics, objects=objects, doors=doors,
                       bounds=(0, 0, size, size),
                       robots=[{"spec": MOVER_SPEC,
                                "state": {"base_pose": {"x": size / 2,
                                                        "y": size / 2}}}])


def test_empty_room_free_minus_inflation():
    world = walled_room()
    grid = build_grid(world, world.robot_specs["mover"])
    margin = 0.1 + world.robot_specs["mover"].base_footprint_radius
    for cy in range(grid.height):
        for cx in range(grid.width):
            px, py = grid.center_of((cx, cy))
            deep_inside = (margin + RESOLUTION < px < 5.0 - margin - RESOLUTION
                           and margin + RESOLUTION < py < 5.0 - margin - RESOLUTION)
            if deep_inside:
                assert not grid.blocked[cy, cx], (cx, cy)
    # borders are inflated solid
    assert grid.blocked[0, :].all()
    assert grid.blocked[:, 0].all()


def test_closed_door_blocks_corridor_open_frees_it():
    doors = [{"id": "d1", "open": False,
              "span": {"center": [2.5, 2.5], "size": [5.0, 0.4], "z": [0, 2]}}]
    world = walled_room(doors=doors)
    spec = world.robot_specs["mover"]
    closed = build_grid(world, spec)
    south = closed.cell_of(2.5, 1.0)
    north = closed.cell_of(2.5, 4.0)
    assert find_path(closed, south, north) is None

    opened = apply_mutation(world, SetDoor("d1", True))
    open_grid = build_grid(opened, spec)
    assert find_path(open_grid, south, north) is not None


def test_grid_rebuild_bit_identical():
    world = walled_room(objects=[
        {"id": "b1", "class": "Box", "pose": {"x": 1.5, "y": 2.0, "z": 0.0,
                                              "yaw": 0.3}}])
    spec = world.robot_specs["mover"]
    a = build_grid(world, spec)
    b = build_grid(world, spec)
    assert a.to_bytes() == b.to_bytes()


def test_floor_objects_block_navigation():
    world = walled_room(objects=[
        {"id": "tall", "class": "Box", "pose": {"x": 1.5, "y": 1.5, "z": 0.0}},
    ])
    grid = build_grid(world, world.robot_specs["mover"])
    tall_cell = grid.cell_of(1.5, 1.5)
    assert grid.blocked[tall_cell[1], tall_cell[0]]
    # at 0.1 m the box is furniture, not sweepable debris
    assert not grid.vacuum_obstacles[tall_cell[1], tall_cell[0]]


def test_debris_below_threshold_marked_vacuum_obstacle():
    classes = [
        {"class_name": "Sock",
         "intrinsic": {"size": [0.1, 0.1, 0.03], "weight": 0.05},
         "methods": [{"name": "Move", "spatial_param": "PlacementPose"}]},
    ]
    world = build_scene(classes=classes, objects=[
        {"id": "sock", "class": "Sock", "pose": {"x": 2.0, "y": 2.0, "z": 0.0}}])
    grid = build_grid(world, world.robot_specs["mover"])
    cell = grid.cell_of(2.0, 2.0)
    assert grid.vacuum_obstacles[cell[1], cell[0]]
    assert grid.blocked[cell[1], cell[0]]


def test_objects_on_furniture_do_not_block(table_scene):
    grid = build_grid(table_scene, table_scene.robot_specs["mover"])
    # the mug is on the table; the table blocks, the mug adds nothing beyond it
    cell = grid.cell_of(2.0, 2.0)
    assert grid.blocked[cell[1], cell[0]]  # table itself


# -- A* ------------------------------------------------------------------------

def random_grid(rng: random.Random, n: int = 50, p: float = 0.3) -> OccupancyGrid:
    blocked = np.zeros((n, n), dtype=bool)
    for cy in range(n):
        for cx in range(n):
            if rng.random() < p:
                blocked[cy, cx] = True
    return OccupancyGrid(origin=(0.0, 0.0), resolution=RESOLUTION, width=n,
                         height=n, blocked=blocked,
                         vacuum_obstacles=np.zeros((n, n), dtype=bool),
                         inflation_radius=0.0)


def bfs_reachable(grid: OccupancyGrid, start, goal) -> bool:
    """Flood-fill oracle with the same corner-cutting rule."""
    from collections import deque

    if grid.blocked[start[1], start[0]] or grid.blocked[goal[1], goal[0]]:
        return False
    seen = {start}
    q = deque([start])
    while q:
        cx, cy = q.popleft()
        if (cx, cy) == goal:
            return True
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = cx + dx, cy + dy
                if not (0 <= nx < grid.width and 0 <= ny < grid.height):
                    continue
                if grid.blocked[ny, nx] or (nx, ny) in seen:
                    continue
                if dx != 0 and dy != 0:
                    if grid.blocked[cy, cx + dx] or grid.blocked[cy + dy, cx]:
                        continue
                seen.add((nx, ny))
                q.append((nx, ny))
    return False


def dijkstra_cost(grid: OccupancyGrid, start, goal):
    """Independent uniform-cost search (no heuristic)."""
    import heapq

    dist = {start: 0.0}
    heap = [(0.0, start)]
    while heap:
        d, cur = heapq.heappop(heap)
        if cur == goal:
            return d * grid.resolution
        if d > dist.get(cur, math.inf):
            continue
        cx, cy = cur
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx, ny = cx + dx, cy + dy
                if not (0 <= nx < grid.width and 0 <= ny < grid.height):
                    continue
                if grid.blocked[ny, nx]:
                    continue
                if dx != 0 and dy != 0:
                    if grid.blocked[cy, cx + dx] or grid.blocked[cy + dy, cx]:
                        continue
                step = math.sqrt(2.0) if dx and dy else 1.0
                nd = d + step
                if nd < dist.get((nx, ny), math.inf):
                    dist[(nx, ny)] = nd
                    heapq.heappush(heap, (nd, (nx, ny)))
    return None


def test_start_equals_goal():
    grid = random_grid(random.Random(1), n=10, p=0.0)
    path, cost = find_path(grid, (3, 3), (3, 3))
    assert path == [(3, 3)]
    assert cost == 0.0


def test_straight_corridor_cost():
    grid = random_grid(random.Random(1), n=12, p=0.0)
    path, cost = find_path(grid, (1, 5), (10, 5))
    assert len(path) == 10
    assert cost == pytest.approx(9 * RESOLUTION)


def test_blocked_endpoints_raise():
    grid = random_grid(random.Random(2), n=10, p=0.0)
    grid.blocked[5, 5] = True
    with pytest.raises(CellBlocked):
        find_path(grid, (5, 5), (1, 1))
    with pytest.raises(CellBlocked):
        find_path(grid, (1, 1), (5, 5))
    with pytest.raises(CellBlocked):
        find_path(grid, (1, 1), (99, 99))


def test_no_corner_cutting():
    grid = random_grid(random.Random(3), n=5, p=0.0)
    # wall with a diagonal gap: (2,1) and (1,2) blocked, so moving from
    # (1,1) to (2,2) diagonally is forbidden
    grid.blocked[1, 2] = True
    grid.blocked[2, 1] = True
    result = find_path(grid, (1, 1), (2, 2))
    if result is not None:
        path, _ = result
        for a, b in zip(path, path[1:]):
            dx, dy = b[0] - a[0], b[1] - a[1]
            if dx != 0 and dy != 0:
                assert not grid.blocked[a[1], a[0] + dx]
                assert not grid.blocked[a[1] + dy, a[0]]


def test_astar_existence_matches_bfs_sample():
    rng = random.Random(12345)
    for _ in range(100):
        grid = random_grid(rng, n=30, p=0.35)
        start = (rng.randrange(30), rng.randrange(30))
        goal = (rng.randrange(30), rng.randrange(30))
        if grid.blocked[start[1], start[0]] or grid.blocked[goal[1], goal[0]]:
            continue
        ours = find_path(grid, start, goal) is not None
        assert ours == bfs_reachable(grid, start, goal)


def test_astar_cost_matches_dijkstra_sample():
    rng = random.Random(999)
    for _ in range(50):
        grid = random_grid(rng, n=25, p=0.3)
        start = (rng.randrange(25), rng.randrange(25))
        goal = (rng.randrange(25), rng.randrange(25))
        if grid.blocked[start[1], start[0]] or grid.blocked[goal[1], goal[0]]:
            continue
        ours = find_path(grid, start, goal)
        oracle = dijkstra_cost(grid, start, goal)
        if oracle is None:
            assert ours is None
        else:
            assert ours is not None
            assert ours[1] == pytest.approx(oracle, abs=1e-9)


def test_adding_obstacles_never_creates_paths():
    rng = random.Random(777)
    for _ in range(30):
        grid = random_grid(rng, n=20, p=0.35)
        start = (rng.randrange(20), rng.randrange(20))
        goal = (rng.randrange(20), rng.randrange(20))
        if grid.blocked[start[1], start[0]] or grid.blocked[goal[1], goal[0]]:
            continue
        before = find_path(grid, start, goal) is not None
        denser = OccupancyGrid(
            origin=grid.origin, resolution=grid.resolution, width=grid.width,
            height=grid.height, blocked=grid.blocked.copy(),
            vacuum_obstacles=grid.vacuum_obstacles,
            inflation_radius=grid.inflation_radius)
        for _ in range(15):
            cx, cy = rng.randrange(20), rng.randrange(20)
            if (cx, cy) not in (start, goal):
                denser.blocked[cy, cx] = True
        after = find_path(denser, start, goal) is not None
        assert not (after and not before)


def test_cost_field_matches_astar():
    rng = random.Random(4242)
    grid = random_grid(rng, n=30, p=0.3)
    seed = (15, 15)
    if grid.blocked[15, 15]:
        grid.blocked[15, 15] = False
    costs = cost_field(grid, seed)
    for _ in range(40):
        goal = (rng.randrange(30), rng.randrange(30))
        if grid.blocked[goal[1], goal[0]]:
            continue
        result = find_path(grid, seed, goal)
        if result is None:
            assert not math.isfinite(costs[goal[1], goal[0]])
        else:
            assert costs[goal[1], goal[0]] == pytest.approx(result[1], abs=1e-9)
            # gradient descent reconstructs an optimal path
            path = descend_path(grid, costs, goal)
            assert path[0] == seed and path[-1] == goal
