"""Geometric primitives shared by the world model and the spatial checks.

Everything solid in the engine is a yaw-rotated box: a rectangle in the floor
plane (center, half extents, yaw) extruded over a z interval. That keeps every
predicate (overlap, penetration depth, ray cast, point containment) exact and
cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi


def normalize_yaw(yaw: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    yaw = math.fmod(yaw, TWO_PI)
    if yaw > math.pi:
        yaw -= TWO_PI
    elif yaw <= -math.pi:
        yaw += TWO_PI
    return yaw


@dataclass(frozen=True)
class Pose:
    """Position plus heading. z is the underside of whatever sits at the pose."""

    x: float
    y: float
    z: float = 0.0
    yaw: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "z": self.z, "yaw": self.yaw}

    @staticmethod
    def from_dict(d: dict) -> "Pose":
        return Pose(float(d["x"]), float(d["y"]), float(d.get("z", 0.0)),
                    float(d.get("yaw", 0.0)))


@dataclass(frozen=True)
class Box:
    """Yaw-rotated box: footprint rectangle at (cx, cy) spanning z0..z1."""

    cx: float
    cy: float
    half_w: float
    half_d: float
    yaw: float
    z0: float
    z1: float

    @staticmethod
    def from_pose_size(pose: Pose, size: tuple[float, float, float]) -> "Box":
        w, d, h = size
        return Box(pose.x, pose.y, w / 2.0, d / 2.0, pose.yaw, pose.z, pose.z + h)

    @staticmethod
    def axis_aligned(x0: float, y0: float, x1: float, y1: float,
                     z0: float, z1: float) -> "Box":
        return Box((x0 + x1) / 2.0, (y0 + y1) / 2.0,
                   abs(x1 - x0) / 2.0, abs(y1 - y0) / 2.0, 0.0, z0, z1)

    @property
    def height(self) -> float:
        return self.z1 - self.z0

    def corners(self) -> list[tuple[float, float]]:
        """Footprint corners in world coordinates, counterclockwise."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        out = []
        for dx, dy in ((self.half_w, self.half_d), (-self.half_w, self.half_d),
                       (-self.half_w, -self.half_d), (self.half_w, -self.half_d)):
            out.append((self.cx + c * dx - s * dy, self.cy + s * dx + c * dy))
        return out

    def bounding_radius(self) -> float:
        return math.hypot(self.half_w, self.half_d)

    def contains_point(self, x: float, y: float, z: float,
                       eps: float = 0.0) -> bool:
        if not (self.z0 - eps <= z <= self.z1 + eps):
            return False
        return self.footprint_contains(x, y, eps)

    def footprint_contains(self, x: float, y: float, eps: float = 0.0) -> bool:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx, dy = x - self.cx, y - self.cy
        lx = c * dx + s * dy
        ly = -s * dx + c * dy
        return abs(lx) <= self.half_w + eps and abs(ly) <= self.half_d + eps

    def shrunk(self, margin: float, z_floor: float = 0.0) -> "Box":
        """Interior box: walls pulled in by `margin`, floor raised by `z_floor`."""
        return Box(self.cx, self.cy,
                   max(self.half_w - margin, 1e-6),
                   max(self.half_d - margin, 1e-6),
                   self.yaw, self.z0 + z_floor, self.z1)

    def translated(self, dx: float, dy: float, dz: float = 0.0) -> "Box":
        return Box(self.cx + dx, self.cy + dy, self.half_w, self.half_d,
                   self.yaw, self.z0 + dz, self.z1 + dz)


def _project_extent(corners: list[tuple[float, float]],
                    ax: float, ay: float) -> tuple[float, float]:
    vals = [cx * ax + cy * ay for cx, cy in corners]
    return min(vals), max(vals)


def footprint_overlap(a: Box, b: Box) -> float:
    """Minimum separation-axis overlap of two footprints; <= 0 means disjoint.

    Classic SAT over the four face normals of the two rectangles. The returned
    value is the smallest overlap across axes, i.e. the translation depth
    needed to separate them.
    """
    ca, cb = a.corners(), b.corners()
    best = math.inf
    for yaw in (a.yaw, b.yaw):
        c, s = math.cos(yaw), math.sin(yaw)
        for ax, ay in ((c, s), (-s, c)):
            amin, amax = _project_extent(ca, ax, ay)
            bmin, bmax = _project_extent(cb, ax, ay)
            overlap = min(amax, bmax) - max(amin, bmin)
            if overlap <= 0.0:
                return overlap
            best = min(best, overlap)
    return best


def penetration_depth(a: Box, b: Box) -> float:
    """3D penetration depth between two boxes; <= 0 when they do not overlap."""
    dz = min(a.z1, b.z1) - max(a.z0, b.z0)
    if dz <= 0.0:
        return dz
    dxy = footprint_overlap(a, b)
    if dxy <= 0.0:
        return dxy
    return min(dz, dxy)


def boxes_intersect(a: Box, b: Box, tol: float = 0.0) -> bool:
    return penetration_depth(a, b) > tol


def segment_swept_box(x0: float, y0: float, x1: float, y1: float,
                      z_center: float, cross: float) -> Box:
    """Box swept by a square cross-section moving along a horizontal segment."""
    dx, dy = x1 - x0, y1 - y0
    length = math.hypot(dx, dy)
    yaw = math.atan2(dy, dx) if length > 0.0 else 0.0
    half = cross / 2.0
    return Box((x0 + x1) / 2.0, (y0 + y1) / 2.0,
               length / 2.0 + half, half, yaw,
               z_center - half, z_center + half)


def ray_box_distance(origin: tuple[float, float, float],
                     direction: tuple[float, float, float],
                     box: Box) -> float | None:
    """Distance along the ray to the first intersection with `box`, or None.

    Solved with the slab method in the box's local frame (yaw undone around
    the box center).
    """
    ox, oy, oz = origin
    dx, dy, dz = direction
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    # rotate into box frame
    rx, ry = ox - box.cx, oy - box.cy
    lox = c * rx + s * ry
    loy = -s * rx + c * ry
    ldx = c * dx + s * dy
    ldy = -s * dx + c * dy
    tmin, tmax = 0.0, math.inf
    for start, delta, lo, hi in (
        (lox, ldx, -box.half_w, box.half_w),
        (loy, ldy, -box.half_d, box.half_d),
        (oz, dz, box.z0, box.z1),
    ):
        if abs(delta) < 1e-12:
            if start < lo or start > hi:
                return None
            continue
        t0 = (lo - start) / delta
        t1 = (hi - start) / delta
        if t0 > t1:
            t0, t1 = t1, t0
        tmin = max(tmin, t0)
        tmax = min(tmax, t1)
        if tmin > tmax:
            return None
    return tmin


def point_in_polygon(x: float, y: float,
                     polygon: list[tuple[float, float]]) -> bool:
    """Even-odd ray cast; points on an edge count as inside often enough."""
    inside = False
    n = len(polygon)
    for i in range(n):
        x0, y0 = polygon[i]
        x1, y1 = polygon[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x < x0 + t * (x1 - x0):
                inside = not inside
    return inside


def _segments_intersect(p1, p2, p3, p4) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if v > 1e-12:
            return 1
        if v < -1e-12:
            return -1
        return 0

    o1, o2 = orient(p1, p2, p3), orient(p1, p2, p4)
    o3, o4 = orient(p3, p4, p1), orient(p3, p4, p2)
    if o1 != o2 and o3 != o4:
        return True
    return False


def polygon_intersects_footprint(polygon: list[tuple[float, float]],
                                 box: Box) -> bool:
    """True when a polygon and a box footprint share any area or boundary."""
    corners = box.corners()
    for x, y in corners:
        if point_in_polygon(x, y, polygon):
            return True
    for x, y in polygon:
        if box.footprint_contains(x, y):
            return True
    n = len(polygon)
    for i in range(n):
        e0, e1 = polygon[i], polygon[(i + 1) % n]
        for j in range(4):
            if _segments_intersect(e0, e1, corners[j], corners[(j + 1) % 4]):
                return True
    return False
