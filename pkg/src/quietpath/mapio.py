"""JSON map files and random instance generation."""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .errors import DegenerateGeometryError, ValidationError
from .geometry import ConvexPolygon, Point2D, convex_hull, polygons_disjoint
from .graph import DEFAULT_PATH_PARAMS, EnergyParams, QuietZoneMap

SCHEMA_VERSION = 1

_POINT = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

MAP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "zones", "source", "params"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "zones": {"type": "array", "items": {"type": "array", "items": _POINT, "minItems": 3}},
        "source": _POINT,
        "goal": {"oneOf": [_POINT, {"type": "null"}]},
        "targets": {"type": "array", "items": _POINT},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["alpha", "beta", "q_min", "q_max", "q_init"],
            "properties": {k: {"type": "number"} for k in ("alpha", "beta", "q_min", "q_max", "q_init")},
        },
    },
}


def map_to_dict(m: QuietZoneMap) -> dict:
    if m.scale != 1.0:
        raise ValidationError("only unscaled maps are written to disk")
    return {
        "schema_version": SCHEMA_VERSION,
        "zones": [[[float(x), float(y)] for x, y in z.vertices] for z in m.zones],
        "source": [float(m.source.x), float(m.source.y)],
        "goal": None if m.goal is None else [float(m.goal.x), float(m.goal.y)],
        "targets": [[float(t.x), float(t.y)] for t in m.targets],
        "params": m.params.as_dict(),
    }


def map_from_dict(data: dict) -> QuietZoneMap:
    try:
        jsonschema.validate(data, MAP_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"invalid map file: {exc.message}") from None
    params = EnergyParams(**data["params"])
    return QuietZoneMap.from_raw(data["zones"], data["source"], data.get("goal"),
                                 data.get("targets", []), params)


def load_map(path) -> QuietZoneMap:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return map_from_dict(data)


def dump_map(m: QuietZoneMap) -> str:
    return json.dumps(map_to_dict(m), indent=1, sort_keys=True) + "\n"


def save_map(m: QuietZoneMap, path) -> None:
    Path(path).write_text(dump_map(m))


def random_polygon(rng: np.random.Generator, center, radius: float, n_vertices: int) -> ConvexPolygon:
    ang = np.sort(rng.uniform(0.0, 2 * math.pi, n_vertices))
    r = radius * rng.uniform(0.75, 1.0, n_vertices)
    pts = np.column_stack([center[0] + r * np.cos(ang), center[1] + r * np.sin(ang)])
    return convex_hull(pts)


def generate_zones(n_zones: int = 15, width: float = 12000.0, height: float = 8000.0, seed: int = 0,
                   vertices=(5, 9), radius=(300.0, 900.0), max_attempts: int = 100_000,
                   margin: float = 0.0) -> list[ConvexPolygon]:
    """Rejection-sample pairwise disjoint convex polygons inside the box."""
    if n_zones < 0:
        raise ValidationError("zone count must be non-negative")
    rng = np.random.default_rng(seed)
    zones: list[ConvexPolygon] = []
    attempts = 0
    while len(zones) < n_zones:
        attempts += 1
        if attempts > max_attempts:
            raise ValidationError(f"could only place {len(zones)} of {n_zones} zones; try fewer zones")
        rad = rng.uniform(*radius)
        c = (rng.uniform(rad, width - rad), rng.uniform(rad, height - rad))
        k = int(rng.integers(vertices[0], vertices[1] + 1))
        try:
            poly = random_polygon(rng, c, rad, k)
        except DegenerateGeometryError:
            continue
        x0, y0, x1, y1 = poly.bbox
        if x0 < 0 or y0 < 0 or x1 > width or y1 > height:
            continue
        if all(polygons_disjoint(poly, z) and (margin <= 0 or _gap(poly, z) >= margin) for z in zones):
            zones.append(poly)
    return zones


def _gap(p: ConvexPolygon, q: ConvexPolygon) -> float:
    """Lower bound on the distance between two disjoint polygons (vertex-to-edge)."""
    def pd(pt, a, b):
        a, b, pt = np.asarray(a), np.asarray(b), np.asarray(pt)
        ab = b - a
        t = np.clip(np.dot(pt - a, ab) / np.dot(ab, ab), 0, 1)
        return float(np.linalg.norm(a + t * ab - pt))
    best = math.inf
    for x, y in ((p, q), (q, p)):
        for v in x.vertices:
            for a, b in y.edges():
                best = min(best, pd(v, a, b))
    return best


def random_free_point(rng: np.random.Generator, zones, width: float, height: float,
                      max_attempts: int = 10_000) -> Point2D:
    for _ in range(max_attempts):
        p = Point2D(float(rng.uniform(0, width)), float(rng.uniform(0, height)))
        if not any(z.contains(p, strict=False) for z in zones):
            return p
    raise ValidationError("could not sample a free point")


def generate_map(n_zones: int = 15, width: float = 12000.0, height: float = 8000.0, seed: int = 0,
                 params: EnergyParams = DEFAULT_PATH_PARAMS, n_targets: int = 0,
                 min_distance: float = 1000.0, **zone_kw) -> QuietZoneMap:
    """Random map with a source/goal pair at least ``min_distance`` apart."""
    zones = generate_zones(n_zones, width, height, seed, **zone_kw)
    rng = np.random.default_rng([seed, 1])
    s = random_free_point(rng, zones, width, height)
    for _ in range(10_000):
        g = random_free_point(rng, zones, width, height)
        if math.dist(s, g) >= min_distance:
            break
    else:
        raise ValidationError("could not place a goal far enough from the source")
    targets = [random_free_point(rng, zones, width, height) for _ in range(n_targets)]
    return QuietZoneMap.from_raw(zones, s, g, targets, params)


def random_scenarios(m: QuietZoneMap, count: int, seed: int = 0, min_distance: float = 1000.0,
                     width: float | None = None, height: float | None = None) -> list[tuple[Point2D, Point2D]]:
    """Source/goal pairs outside every zone and at least ``min_distance`` apart."""
    if width is None or height is None:
        pts = np.asarray([v for z in m.zones for v in z.vertices] + [m.source], float)
        width, height = float(pts[:, 0].max()), float(pts[:, 1].max())
    rng = np.random.default_rng([seed, 2])
    out = []
    while len(out) < count:
        s = random_free_point(rng, m.zones, width, height)
        g = random_free_point(rng, m.zones, width, height)
        if math.dist(s, g) >= min_distance:
            out.append((s, g))
    return out
