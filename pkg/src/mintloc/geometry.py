"""Floor plans, virtual anchors (VAs) and geometric visibility.

Walls are 2D segments. Reflective walls mirror base stations (BSs) into
virtual anchors; non-reflective walls and obstructions only block paths.
Visibility of a VA at an agent position is decided by unfolding the
reflection path back to the physical BS and ray-testing every leg.

Floor-plan text format (one record per line, ``#`` starts a comment)::

    wall        x1 y1 x2 y2 [reflective]   # reflective flag 1/0, default 1
    obstruction x1 y1 x2 y2
    bs          x y

All values are meters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels

#: Positions closer than this (meters) are treated as the same VA.
DEDUP_TOL = 1e-9


class GeometryError(ValueError):
    """Invalid geometric input (degenerate wall, malformed plan file...)."""


class Point2D(NamedTuple):
    x: float
    y: float


def as_point(p) -> Point2D:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite point {p!r}")
    return Point2D(x, y)


@dataclass(frozen=True)
class WallSegment:
    endpoint_a: Point2D
    endpoint_b: Point2D
    reflective: bool = True

    def __post_init__(self):
        a = as_point(self.endpoint_a)
        b = as_point(self.endpoint_b)
        object.__setattr__(self, "endpoint_a", a)
        object.__setattr__(self, "endpoint_b", b)
        if math.hypot(b.x - a.x, b.y - a.y) == 0.0:
            raise GeometryError(f"degenerate wall at {a}")

    @property
    def row(self) -> tuple[float, float, float, float]:
        return (self.endpoint_a.x, self.endpoint_a.y, self.endpoint_b.x, self.endpoint_b.y)

    @property
    def length(self) -> float:
        return math.hypot(self.endpoint_b.x - self.endpoint_a.x, self.endpoint_b.y - self.endpoint_a.y)


@dataclass(frozen=True)
class FloorPlan:
    """Walls, blocking-only obstructions and (optionally) BS positions.

    Segment index ``i < len(walls)`` refers to ``walls[i]``; obstructions follow.
    VA mirror sequences store these indices.
    """

    walls: tuple[WallSegment, ...]
    obstructions: tuple[WallSegment, ...] = ()
    base_stations: tuple[Point2D, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "walls", tuple(self.walls))
        object.__setattr__(
            self, "obstructions", tuple(WallSegment(o.endpoint_a, o.endpoint_b, False) for o in self.obstructions)
        )
        object.__setattr__(self, "base_stations", tuple(as_point(b) for b in self.base_stations))

    @cached_property
    def segments(self) -> np.ndarray:
        """All segments as an ``(n, 4)`` float array: walls first, then obstructions."""
        rows = [w.row for w in self.walls] + [o.row for o in self.obstructions]
        return np.array(rows, dtype=np.float64).reshape(-1, 4)

    @property
    def reflective_indices(self) -> list[int]:
        return [i for i, w in enumerate(self.walls) if w.reflective]

    def without_obstructions(self) -> FloorPlan:
        return FloorPlan(self.walls, (), self.base_stations)

    def with_obstructions(self, obstructions: Iterable[WallSegment]) -> FloorPlan:
        return FloorPlan(self.walls, tuple(self.obstructions) + tuple(obstructions), self.base_stations)

    def bounding_box(self) -> tuple[float, float, float, float]:
        s = self.segments
        xs = np.concatenate([s[:, 0], s[:, 2]])
        ys = np.concatenate([s[:, 1], s[:, 3]])
        return float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max())


@dataclass(frozen=True)
class VirtualAnchor:
    id: int
    bs_id: int
    position: Point2D
    order: int
    mirror_walls: tuple[int, ...] = ()


@dataclass
class VisibleSet:
    position_index: int
    bs_id: int
    vas: list[VirtualAnchor] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)
    angles: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.vas)


def mirror_point(p, w: WallSegment) -> Point2D:
    """Reflect ``p`` across the infinite line through wall ``w``."""
    if not isinstance(w, WallSegment):
        raise GeometryError("mirror_point needs a WallSegment")
    p = as_point(p)
    x, y = _kernels._pure.mirror_xy(p.x, p.y, *w.row)
    return Point2D(x, y)


def generate_vas(plan: FloorPlan, bs, bs_id: int, max_order: int, first_id: int = 0) -> list[VirtualAnchor]:
    """Image-source enumeration of the VAs of one BS up to ``max_order``.

    Order-k anchors mirror every order-(k-1) anchor across each reflective wall
    except the one used in its last mirror step. Positions repeated within
    ``DEDUP_TOL`` keep the first (lowest-order) anchor only. Obstructions never
    mirror.
    """
    if max_order < 0:
        raise GeometryError("max_order must be >= 0")
    bs = as_point(bs)
    refl = plan.reflective_indices
    root = VirtualAnchor(first_id, bs_id, bs, 0, ())
    out = [root]
    kept = np.array([bs], dtype=np.float64)
    frontier = [root]
    next_id = first_id + 1
    for order in range(1, max_order + 1):
        children = []
        for parent in frontier:
            last = parent.mirror_walls[-1] if parent.mirror_walls else -1
            for wi in refl:
                if wi == last:
                    continue
                pos = mirror_point(parent.position, plan.walls[wi])
                if np.min(np.hypot(kept[:, 0] - pos.x, kept[:, 1] - pos.y)) <= DEDUP_TOL:
                    continue
                va = VirtualAnchor(next_id, bs_id, pos, order, parent.mirror_walls + (wi,))
                next_id += 1
                kept = np.vstack([kept, pos])
                children.append(va)
        out.extend(children)
        frontier = children
    return out


class VaTable:
    """Array form of a VA list, for batched visibility queries."""

    def __init__(self, vas: Sequence[VirtualAnchor]):
        self.vas = list(vas)
        n = len(self.vas)
        width = max([va.order for va in self.vas], default=0)
        self.positions = np.array([va.position for va in self.vas], dtype=np.float64).reshape(n, 2)
        self.orders = np.array([va.order for va in self.vas], dtype=np.int64)
        self.ids = np.array([va.id for va in self.vas], dtype=np.int64)
        self.bs_ids = np.array([va.bs_id for va in self.vas], dtype=np.int64)
        self.seq = np.full((n, max(width, 1)), -1, dtype=np.int64)
        for i, va in enumerate(self.vas):
            self.seq[i, : va.order] = va.mirror_walls

    def __len__(self) -> int:
        return len(self.vas)

    def visible(self, p, plan: FloorPlan) -> np.ndarray:
        """Boolean visibility mask of all anchors at ``p``."""
        if not self.vas:
            return np.zeros(0, dtype=bool)
        p = as_point(p)
        return _kernels.visible_mask(p, self.positions, self.seq, self.orders, plan.segments).astype(bool)


def is_visible(va: VirtualAnchor, p, plan: FloorPlan) -> bool:
    """True iff the reflection path of ``va`` reaches ``p`` unblocked.

    Every reflection point must lie strictly inside its wall segment (points
    within 1e-9 m of an endpoint do not count) and no leg may cross any other
    wall or obstruction.
    """
    return bool(VaTable([va]).visible(p, plan)[0])


def path_angle(va_pos, p) -> float:
    """Angle of ``p - va_pos`` in [-pi, pi); 0 when the points coincide."""
    dx = float(p[0]) - float(va_pos[0])
    dy = float(p[1]) - float(va_pos[1])
    if dx == 0.0 and dy == 0.0:
        return 0.0
    ang = math.atan2(dy, dx)
    return -math.pi if ang >= math.pi else ang


def expected_visible_set(p, position_index: int, all_vas, plan: FloorPlan) -> VisibleSet:
    table = all_vas if isinstance(all_vas, VaTable) else VaTable(all_vas)
    p = as_point(p)
    mask = table.visible(p, plan)
    vas = [va for va, m in zip(table.vas, mask) if m]
    bs_ids = {va.bs_id for va in table.vas}
    out = VisibleSet(position_index, bs_ids.pop() if len(bs_ids) == 1 else -1)
    for va in vas:
        out.vas.append(va)
        out.distances.append(math.hypot(p.x - va.position.x, p.y - va.position.y))
        out.angles.append(path_angle(va.position, p))
    return out


def reflection_path(va: VirtualAnchor, p, plan: FloorPlan) -> list[Point2D]:
    """Unfolded path ``[bs, q_1, ..., q_k, p]`` for ``va`` (no visibility check)."""
    p = as_point(p)
    pts = [p]
    cur, img = p, va.position
    for wi in reversed(va.mirror_walls):
        row = plan.walls[wi].row
        lx, ly = img.x - cur.x, img.y - cur.y
        ex, ey = row[2] - row[0], row[3] - row[1]
        denom = lx * ey - ly * ex
        if denom == 0.0:
            raise GeometryError("path leg parallel to its reflecting wall")
        t = ((row[0] - cur.x) * ey - (row[1] - cur.y) * ex) / denom
        cur = Point2D(cur.x + t * lx, cur.y + t * ly)
        pts.append(cur)
        img = mirror_point(img, plan.walls[wi])
    pts.append(img)
    return pts[::-1]


def load_floor_plan(path) -> FloorPlan:
    """Parse the plain-text floor-plan format described in the module docstring."""
    walls, obstructions, bss = [], [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *vals = line.split()
        try:
            nums = [float(v) for v in vals]
        except ValueError as exc:
            raise GeometryError(f"{path}:{lineno}: bad number ({exc})") from None
        kind = kind.lower()
        if kind == "wall" and len(nums) in (4, 5):
            reflective = bool(int(nums[4])) if len(nums) == 5 else True
            walls.append(WallSegment(Point2D(*nums[:2]), Point2D(*nums[2:4]), reflective))
        elif kind == "obstruction" and len(nums) == 4:
            obstructions.append(WallSegment(Point2D(*nums[:2]), Point2D(*nums[2:4]), False))
        elif kind == "bs" and len(nums) == 2:
            bss.append(Point2D(*nums))
        else:
            raise GeometryError(f"{path}:{lineno}: cannot parse {raw!r}")
    return FloorPlan(tuple(walls), tuple(obstructions), tuple(bss))


def save_floor_plan(plan: FloorPlan, path) -> None:
    lines = ["# mintloc floor plan v1 (meters)"]
    for w in plan.walls:
        lines.append("wall {:.9g} {:.9g} {:.9g} {:.9g} {:d}".format(*w.row, int(w.reflective)))
    for o in plan.obstructions:
        lines.append("obstruction {:.9g} {:.9g} {:.9g} {:.9g}".format(*o.row))
    for b in plan.base_stations:
        lines.append(f"bs {b.x:.9g} {b.y:.9g}")
    Path(path).write_text("\n".join(lines) + "\n")
