"""Planar primitives: convex zones, sides, segment blocking and side-to-side visibility.

All predicates treat contact with a zone boundary (sliding along an edge,
grazing a vertex) as free; only the open interior of a zone blocks travel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateGeometryError, ValidationError

GEOM_TOL = 1e-9
LAMBDA_TOL = 1e-4


class Point2D(NamedTuple):
    x: float
    y: float


def as_point(p) -> Point2D:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise ValidationError(f"non-finite coordinate {p!r}")
    return Point2D(x, y)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_indices(pts: np.ndarray, rel_eps: float = 1e-12) -> list[int]:
    """Andrew's monotone chain; collinear points are dropped. Returns CCW indices."""
    order = sorted(range(len(pts)), key=lambda i: (pts[i][0], pts[i][1]))
    span = float(np.ptp(pts, axis=0).max()) if len(pts) else 0.0
    eps = rel_eps * max(span, 1.0) ** 2

    def chain(idx):
        out: list[int] = []
        for i in idx:
            while len(out) >= 2 and _cross(pts[out[-2]], pts[out[-1]], pts[i]) <= eps:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    return lower[:-1] + upper[:-1]


@dataclass(frozen=True)
class ConvexPolygon:
    """A strictly convex polygon with counter-clockwise vertices."""

    vertices: tuple[Point2D, ...]

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        object.__setattr__(self, "vertices", verts)
        k = len(verts)
        if k < 3:
            raise ValidationError("a polygon needs at least 3 vertices")
        if len(set(verts)) != k:
            raise ValidationError("polygon has repeated vertices")
        arr = np.asarray(verts)
        span = float(np.ptp(arr, axis=0).max())
        eps = 1e-12 * max(span, 1.0) ** 2
        for i in range(k):
            if _cross(verts[i - 1], verts[i], verts[(i + 1) % k]) <= eps:
                raise ValidationError(
                    "polygon vertices must be counter-clockwise and strictly convex"
                )

    @classmethod
    def from_points(cls, points) -> "ConvexPolygon":
        return convex_hull(points)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @cached_property
    def normals(self) -> np.ndarray:
        """Outward unit normals, one per edge (v_i -> v_{i+1})."""
        v = self.array
        d = np.roll(v, -1, axis=0) - v
        nrm = np.column_stack([d[:, 1], -d[:, 0]])
        return nrm / np.linalg.norm(nrm, axis=1, keepdims=True)

    @cached_property
    def offsets(self) -> np.ndarray:
        # interior = {x : normals @ x < offsets}
        return np.einsum("ij,ij->i", self.normals, self.array)

    @cached_property
    def bbox(self) -> tuple[float, float, float, float]:
        lo = self.array.min(axis=0)
        hi = self.array.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def edges(self) -> list[tuple[Point2D, Point2D]]:
        k = len(self.vertices)
        return [(self.vertices[i], self.vertices[(i + 1) % k]) for i in range(k)]

    def depth(self, p) -> float:
        """Distance from p to the nearest edge line; positive inside, negative outside."""
        return float(np.min(self.offsets - self.normals @ np.asarray(p, dtype=float)))

    def contains(self, p, strict: bool = True, tol: float = GEOM_TOL) -> bool:
        d = self.depth(p)
        return d > tol if strict else d >= -tol

    def translated(self, dx: float, dy: float) -> "ConvexPolygon":
        return ConvexPolygon(tuple(Point2D(v.x + dx, v.y + dy) for v in self.vertices))

    def scaled(self, factor: float) -> "ConvexPolygon":
        return ConvexPolygon(tuple(Point2D(v.x * factor, v.y * factor) for v in self.vertices))


@dataclass(frozen=True)
class Side:
    """A polygon edge x(lam) = lam*m + (1-lam)*n, or a terminal when m == n.

    Terminals (source, goal, targets) have ``zone_id`` None and are handled by
    the same visibility code as zero-length sides.
    """

    zone_id: int | None
    side_index: int
    m: Point2D
    n: Point2D

    @classmethod
    def terminal(cls, point, label: int = 0) -> "Side":
        p = as_point(point)
        return cls(None, label, p, p)

    @property
    def is_terminal(self) -> bool:
        return self.zone_id is None

    @property
    def length(self) -> float:
        return math.hypot(self.m.x - self.n.x, self.m.y - self.n.y)

    def corners(self) -> list[Point2D]:
        return [self.m] if self.m == self.n else [self.m, self.n]


class VisibilityClass(enum.Enum):
    COMPLETELY_VISIBLE = "CompletelyVisible"
    PARTIALLY_VISIBLE = "PartiallyVisible"
    NOT_VISIBLE = "NotVisible"


@dataclass(frozen=True)
class BoundaryParams:
    """Admissible lambda intervals on both ends of an inter-zone edge."""

    lo_u: float
    hi_u: float
    lo_v: float
    hi_v: float

    def __post_init__(self):
        for lo, hi in ((self.lo_u, self.hi_u), (self.lo_v, self.hi_v)):
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValidationError(f"bad lambda interval [{lo}, {hi}]")

    def swapped(self) -> "BoundaryParams":
        return BoundaryParams(self.lo_v, self.hi_v, self.lo_u, self.hi_u)

    def contains(self, lam_u: float, lam_v: float, tol: float = 0.0) -> bool:
        return (self.lo_u - tol <= lam_u <= self.hi_u + tol
                and self.lo_v - tol <= lam_v <= self.hi_v + tol)


FULL_BOX = BoundaryParams(0.0, 1.0, 0.0, 1.0)


def point_on_side(side: Side, lam: float) -> Point2D:
    if not (0.0 <= lam <= 1.0):
        raise ValidationError(f"lambda {lam} outside [0, 1]")
    return Point2D(lam * side.m.x + (1.0 - lam) * side.n.x,
                   lam * side.m.y + (1.0 - lam) * side.n.y)


def convex_hull(points) -> ConvexPolygon:
    if isinstance(points, ConvexPolygon):
        points = points.vertices
    pts = np.asarray([as_point(p) for p in points], dtype=float)
    if len(pts) < 3:
        raise DegenerateGeometryError("need at least 3 points for a hull")
    pts = np.unique(pts, axis=0)
    idx = _hull_indices(pts) if len(pts) >= 3 else []
    if len(idx) < 3:
        raise DegenerateGeometryError("points are collinear")
    return ConvexPolygon(tuple(Point2D(*pts[i]) for i in idx))


def _bbox_hits(lo, hi, zone: ConvexPolygon, tol: float) -> bool:
    x0, y0, x1, y1 = zone.bbox
    return not (hi[0] <= x0 + tol or lo[0] >= x1 - tol or hi[1] <= y0 + tol or lo[1] >= y1 - tol)


def _segment_enters(a: np.ndarray, b: np.ndarray, zone: ConvexPolygon, tol: float) -> bool:
    fa = zone.offsets - zone.normals @ a
    fb = zone.offsets - zone.normals @ b
    t_lo, t_hi = 0.0, 1.0
    for s, f0 in zip(fb - fa, fa):
        # need f0 + t*s >= tol
        if s > 0:
            t_lo = max(t_lo, (tol - f0) / s)
        elif s < 0:
            t_hi = min(t_hi, (tol - f0) / s)
        elif f0 < tol:
            return False
        if t_hi <= t_lo + 1e-12:
            return False
    return True


def segment_blocked(a, b, zones: Sequence[ConvexPolygon], tol: float = GEOM_TOL) -> bool:
    """True iff the open segment (a, b) passes through the interior of some zone."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    for zone in zones:
        if _bbox_hits(lo, hi, zone, tol) and _segment_enters(a, b, zone, tol):
            return True
    return False


def segments_blocked(starts: np.ndarray, ends: np.ndarray,
                     zones: Sequence[ConvexPolygon], tol: float = GEOM_TOL) -> np.ndarray:
    """Vectorised segment_blocked over rows of ``starts``/``ends``; returns (N, zones) bools."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    out = np.zeros((len(starts), len(zones)), dtype=bool)
    lo, hi = np.minimum(starts, ends), np.maximum(starts, ends)
    for j, zone in enumerate(zones):
        x0, y0, x1, y1 = zone.bbox
        cand = ~((hi[:, 0] <= x0 + tol) | (lo[:, 0] >= x1 - tol)
                 | (hi[:, 1] <= y0 + tol) | (lo[:, 1] >= y1 - tol))
        idx = np.nonzero(cand)[0]
        if len(idx) == 0:
            continue
        fa = zone.offsets[None, :] - starts[idx] @ zone.normals.T
        fb = zone.offsets[None, :] - ends[idx] @ zone.normals.T
        s = fb - fa
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (tol - fa) / s
        t_lo = np.where(s > 0, t, -np.inf).max(axis=1).clip(min=0.0)
        t_hi = np.where(s < 0, t, np.inf).min(axis=1).clip(max=1.0)
        flat_ok = np.all((s != 0) | (fa >= tol), axis=1)
        out[idx, j] = flat_ok & (t_hi > t_lo + 1e-12)
    return out


def _axes_of(pts: np.ndarray) -> np.ndarray:
    if len(pts) < 2:
        return np.zeros((0, 2))
    if len(pts) == 2:
        d = pts[1] - pts[0]
        return np.array([[d[1], -d[0]]]) / np.linalg.norm(d)
    d = np.roll(pts, -1, axis=0) - pts
    nrm = np.column_stack([d[:, 1], -d[:, 0]])
    return nrm / np.linalg.norm(nrm, axis=1, keepdims=True)


def _reduce_region(points) -> np.ndarray:
    """Convex hull vertices of a small point set, possibly degenerate (1 or 2 points)."""
    pts = np.unique(np.asarray(points, dtype=float).round(15), axis=0)
    if len(pts) <= 2:
        return pts
    idx = _hull_indices(pts)
    if len(idx) >= 3:
        return pts[idx]
    # collinear: keep the two extreme points
    d = pts - pts[0]
    direction = pts[np.argmax(np.linalg.norm(d, axis=1))] - pts[0]
    proj = d @ direction
    return pts[[int(np.argmin(proj)), int(np.argmax(proj))]]


def region_blocked(points, zones: Sequence[ConvexPolygon], tol: float = GEOM_TOL) -> bool:
    """True iff the convex hull of ``points`` reaches more than ``tol`` into some zone interior.

    The hull of two sub-segments is exactly the union of all segments joining
    them, so a False answer certifies every such segment as unblocked.
    """
    hull = _reduce_region(points)
    lo, hi = hull.min(axis=0), hull.max(axis=0)
    own_axes = _axes_of(hull)
    for zone in zones:
        if not _bbox_hits(lo, hi, zone, tol):
            continue
        axes = np.vstack([zone.normals, own_axes])
        hp = hull @ axes.T
        zp = zone.array @ axes.T
        separated = (hp.max(axis=0) <= zp.min(axis=0) + tol) | (hp.min(axis=0) >= zp.max(axis=0) - tol)
        if not separated.any():
            return True
    return False


def polygons_disjoint(p: ConvexPolygon, q: ConvexPolygon, tol: float = GEOM_TOL) -> bool:
    """True iff the closed polygons are separated by a gap larger than ``tol``."""
    axes = np.vstack([p.normals, q.normals])
    pp = p.array @ axes.T
    qp = q.array @ axes.T
    gap = np.maximum(qp.min(axis=0) - pp.max(axis=0), pp.min(axis=0) - qp.max(axis=0))
    return bool((gap > tol).any())


def _corner_segments(u: Side, v: Side) -> list[tuple[Point2D, Point2D]]:
    segs = []
    for a in u.corners():
        for b in v.corners():
            if (a, b) not in segs:
                segs.append((a, b))
    return segs


def classify_visibility(u: Side, v: Side, zones: Sequence[ConvexPolygon]) -> VisibilityClass:
    """Count blocked corner-to-corner segments between two sides (or terminals)."""
    blocked = sum(1 for a, b in _corner_segments(u, v)
                  if a != b and segment_blocked(a, b, zones))
    if blocked == 0:
        return VisibilityClass.COMPLETELY_VISIBLE
    if blocked == 1:
        return VisibilityClass.PARTIALLY_VISIBLE
    return VisibilityClass.NOT_VISIBLE


def _side_key(s: Side):
    return (s.m.x, s.m.y, s.n.x, s.n.y)


def _box_points(u: Side, v: Side, iu, iv):
    return [point_on_side(u, iu[0]), point_on_side(u, iu[1]),
            point_on_side(v, iv[0]), point_on_side(v, iv[1])]


def _shrink(u: Side, v: Side, iu, iv, which: int, from_m: bool, zones, tol_lam: float):
    """Shrink one interval from one end until the box is sound; None if impossible."""

    def box(t):
        lo, hi = (iu if which == 0 else iv)
        new = (lo, hi - t * (hi - lo)) if from_m else (lo + t * (hi - lo), hi)
        return (new, iv) if which == 0 else (iu, new)

    if region_blocked(_box_points(u, v, *box(1.0)), zones):
        return None
    lo_t, hi_t = 0.0, 1.0
    while hi_t - lo_t > tol_lam:
        mid = 0.5 * (lo_t + hi_t)
        if region_blocked(_box_points(u, v, *box(mid)), zones):
            lo_t = mid
        else:
            hi_t = mid
    return box(hi_t)


def boundary_params(u: Side, v: Side, zones: Sequence[ConvexPolygon],
                    cls: VisibilityClass | None = None,
                    tol_lam: float = LAMBDA_TOL) -> BoundaryParams | None:
    """Lambda boxes for direct travel between u and v; None when no edge exists.

    The returned box is always sound: every segment between x_u(lam_u) and
    x_v(lam_v) inside it avoids all zone interiors. A terminal's own interval
    is pinned to [0, 0].
    """
    if cls is None:
        cls = classify_visibility(u, v, zones)
    if cls is VisibilityClass.NOT_VISIBLE:
        return None
    if _side_key(u) > _side_key(v):
        res = boundary_params(v, u, zones, cls, tol_lam)
        return None if res is None else res.swapped()

    iu = (0.0, 0.0) if u.is_terminal else (0.0, 1.0)
    iv = (0.0, 0.0) if v.is_terminal else (0.0, 1.0)
    if not region_blocked(_box_points(u, v, iu, iv), zones):
        return BoundaryParams(iu[0], iu[1], iv[0], iv[1])

    best, best_score = None, -1.0
    for which, side in ((0, u), (1, v)):
        if side.is_terminal:
            continue
        for from_m in (False, True):
            res = _shrink(u, v, iu, iv, which, from_m, zones, tol_lam)
            if res is None:
                continue
            (a0, a1), (b0, b1) = res
            score = (1e-3 + a1 - a0) * (1e-3 + b1 - b0)
            if score > best_score + 1e-12:
                best, best_score = res, score
    if best is None:
        return None
    (a0, a1), (b0, b1) = best
    return BoundaryParams(a0, a1, b0, b1)
