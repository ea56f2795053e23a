"""Fuel-optimal path and tour planning for hybrid-electric UAVs around quiet zones."""

from .errors import (
    CertificationError,
    DecodeError,
    DegenerateGeometryError,
    InfeasibleError,
    QuietPathError,
    ValidationError,
)
from .geometry import ConvexPolygon, Point2D, Side
from .graph import DEFAULT_PATH_PARAMS, DEFAULT_TOUR_PARAMS, EnergyParams, QuietZoneMap, build_graph, scale_map
from .planner import PathPlanner, PathResult, PlanConfig, plan_path

__version__ = "0.1.0"

__all__ = [
    "CertificationError", "DecodeError", "DegenerateGeometryError", "InfeasibleError", "QuietPathError",
    "ValidationError", "ConvexPolygon", "Point2D", "Side", "EnergyParams", "QuietZoneMap", "build_graph",
    "scale_map", "DEFAULT_PATH_PARAMS", "DEFAULT_TOUR_PARAMS", "PathPlanner", "PathResult", "PlanConfig",
    "plan_path",
]
