import math

import pytest

from quietpath.geometry import ConvexPolygon, Point2D
from quietpath.graph import DEFAULT_PATH_PARAMS, DEFAULT_TOUR_PARAMS, QuietZoneMap
from quietpath.mapio import generate_map

P = DEFAULT_PATH_PARAMS


def square(cx, cy, half):
    return ConvexPolygon.from_points([(cx - half, cy - half), (cx + half, cy - half),
                                      (cx + half, cy + half), (cx - half, cy + half)])


def empty_map(D, params=P):
    return QuietZoneMap.from_raw([], (0.0, 0.0), (D, 0.0), params=params)


def one_square_map(params=P):
    # a 600x600 zone sitting across the straight line from s to g
    return QuietZoneMap.from_raw([square(1500, 0, 300)], (0, 0), (3000, 0), params=params)


def two_zone_map(params=P):
    return QuietZoneMap.from_raw([square(1200, 100, 300), square(2600, -150, 350)],
                                 (0, 0), (3800, 0), params=params)


def corpus_map(seed, params=P):
    """Desk-scale random instance: 4-8 zones of 4-5 vertices (at most 40 sides)."""
    n = 4 + seed % 5
    return generate_map(n, width=5000, height=3500, seed=seed, params=params, min_distance=3000,
                        vertices=(4, 5), radius=(250.0, 700.0))


def small_map(seed, n_zones, params=P):
    return generate_map(n_zones, width=3000, height=2000, seed=seed, params=params, min_distance=1800,
                        vertices=(4, 6), radius=(200.0, 500.0))


def tour_map(seed, n_targets):
    return generate_map(4, width=4000, height=3000, seed=seed, params=DEFAULT_TOUR_PARAMS, n_targets=n_targets,
                        min_distance=1000, vertices=(4, 5), radius=(200.0, 450.0))


def forced_fuel(params=P, D=2000.0):
    return (params.alpha * D - (params.q_init - params.q_min)) / (params.alpha + params.beta)


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


@pytest.fixture
def params():
    return P


def dist(a, b):
    return math.hypot(a[0] - b[0], a[1] - b[1])


__all__ = ["P", "Point2D", "square", "empty_map", "one_square_map", "two_zone_map", "corpus_map",
           "small_map", "tour_map", "forced_fuel", "rel", "dist"]
