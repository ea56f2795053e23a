"""Independent plan certification from decoded geometry only.

Nothing here reads model variables: SOC is re-simulated from segment
endpoints and fuel distances, and zone interiors are probed by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CertificationError
from .geometry import ConvexPolygon
from .graph import EnergyParams
from .model import PathSolution

SOC_TOL = 1e-6
SAMPLE_SPACING = 1e-3   # scaled units


@dataclass
class SocProfile:
    breakpoints: list[tuple[float, float]]   # (cumulative distance, SOC)
    modes: list[str]
    final: float
    minimum: float
    maximum: float


def _rel(x: float) -> float:
    return SOC_TOL * max(1.0, abs(x))


def simulate_soc(plan: PathSolution, params: EnergyParams, q_init: float | None = None,
                 q_goal_min: float | None = None, q_goal_max: float | None = None,
                 tol: float = SOC_TOL) -> SocProfile:
    """Replay the plan's schedule and check SOC bounds pointwise.

    ``params`` are in the plan's (unscaled) units. Raises CertificationError
    naming the first offending segment.
    """
    al, be = params.alpha, params.beta
    lo, hi = params.q_min - tol, params.q_max + tol
    q = plan.q_start if q_init is None else q_init
    gmin = plan.q_goal_min if q_goal_min is None else q_goal_min
    gmax = plan.q_goal_max if q_goal_max is None else q_goal_max
    if not lo <= q <= hi:
        raise CertificationError(f"initial SOC {q} out of bounds", segment=-1)
    pts = [(0.0, q)]
    modes = []
    dist = 0.0
    qmin_seen = qmax_seen = q
    prev_end = None
    for k, seg in enumerate(plan.segments):
        disp = math.dist(seg.start, seg.end)
        if prev_end is not None and math.dist(prev_end, seg.start) > 1e-6 * max(1.0, disp):
            raise CertificationError("segments are not contiguous", segment=k)
        prev_end = seg.end
        if seg.kind == "intra":
            L = disp
        else:
            # sides and inter edges may be flown longer than their displacement
            # (back and forth along the same boundary or chord)
            L = seg.length
            if L < disp - 1e-7 * max(1.0, disp):
                raise CertificationError(f"{seg.kind} travel shorter than its displacement", segment=k)
        z = seg.fuel
        if z < -1e-9 * max(1.0, L) or z > L + 1e-7 * max(1.0, L):
            raise CertificationError(f"fuel distance {z} outside [0, {L}]", segment=k)
        z = min(max(z, 0.0), L)
        if seg.kind == "intra" and z > 1e-9 * max(1.0, L):
            raise CertificationError("fuel used on an intra-zone edge", segment=k)
        e = L - z
        q_end = q + be * z - al * e
        # extreme SOC inside the segment for the reported schedule
        mode = seg.mode
        if mode == "electric_first":
            inner = [q - al * e]
        elif mode == "fuel_first":
            inner = [q + be * z]
        elif mode in ("electric", "fuel", "interleaved"):
            inner = []
        else:
            raise CertificationError(f"unknown mode {mode!r}", segment=k)
        if mode == "electric" and z > 1e-9 * max(1.0, L):
            raise CertificationError("electric segment burns fuel", segment=k)
        if mode == "fuel" and e > 1e-7 * max(1.0, L):
            raise CertificationError("fuel segment has electric distance", segment=k)
        for v in inner + [q_end]:
            if not lo <= v <= hi:
                raise CertificationError(f"SOC {v:.9g} leaves [{params.q_min}, {params.q_max}]", segment=k)
            qmin_seen, qmax_seen = min(qmin_seen, v), max(qmax_seen, v)
        if mode in ("electric_first", "fuel_first") and L > 0:
            first = e if mode == "electric_first" else z
            pts.append((dist + first, inner[0]))
        dist += L
        pts.append((dist, q_end))
        modes.append(mode)
        q = q_end
    if not (gmin - tol <= q <= gmax + tol):
        raise CertificationError(f"final SOC {q:.9g} outside goal range [{gmin}, {gmax}]",
                                 segment=len(plan.segments) - 1)
    fuel = sum(min(max(s.fuel, 0.0), s.length) for s in plan.segments)
    if abs(fuel - plan.objective) > 1e-6 * max(1.0, plan.objective):
        raise CertificationError(f"objective {plan.objective} differs from fuel total {fuel}")
    return SocProfile(pts, modes, q, qmin_seen, qmax_seen)


@dataclass
class ComplianceReport:
    ok: bool
    violations: list[tuple[int, int, tuple[float, float]]] = field(default_factory=list)  # (segment, zone, point)

    def raise_if_failed(self):
        if not self.ok:
            seg, zone, pt = self.violations[0]
            raise CertificationError(f"fuel use inside zone {zone} at {pt}", segment=seg, zone=zone)


def _strict_depth(zone: ConvexPolygon, P: np.ndarray) -> np.ndarray:
    V = np.asarray(zone.vertices, dtype=float)
    W = np.roll(V, -1, axis=0)
    edge = W - V
    # CCW polygon: interior is to the left of every edge
    cross = edge[None, :, 0] * (P[:, None, 1] - V[None, :, 1]) - edge[None, :, 1] * (P[:, None, 0] - V[None, :, 0])
    return (cross / np.linalg.norm(edge, axis=1)[None, :]).min(axis=1)


def check_zone_compliance(plan: PathSolution, zones: Sequence[ConvexPolygon],
                          spacing: float | None = None, tol: float | None = None) -> ComplianceReport:
    """Sample every fuel-bearing segment and flag samples strictly inside a zone.

    Defaults: spacing 1e-3 and tolerance 1e-9 in scaled units, converted with
    the plan's scale factor.
    """
    gamma = plan.scale if plan.scale > 0 else 1.0
    spacing = SAMPLE_SPACING / gamma if spacing is None else spacing
    tol = 1e-9 / gamma if tol is None else tol
    report = ComplianceReport(True)
    for k, seg in enumerate(plan.segments):
        if seg.kind == "intra" and seg.fuel > 1e-9 * max(1.0, seg.length):
            report.ok = False
            report.violations.append((k, -1, tuple(seg.start)))
            continue
        if seg.fuel <= 0:
            continue
        a, b = np.asarray(seg.start, float), np.asarray(seg.end, float)
        n = max(2, int(math.ceil(np.linalg.norm(b - a) / spacing)) + 1)
        P = a[None, :] + np.linspace(0.0, 1.0, n)[:, None] * (b - a)[None, :]
        lo_, hi_ = np.minimum(a, b), np.maximum(a, b)
        for zid, zone in enumerate(zones):
            x0, y0, x1, y1 = zone.bbox
            if hi_[0] < x0 or lo_[0] > x1 or hi_[1] < y0 or lo_[1] > y1:
                continue
            depth = _strict_depth(zone, P)
            bad = np.nonzero(depth > tol)[0]
            if len(bad):
                report.ok = False
                report.violations.append((k, zid, tuple(P[bad[0]])))
    return report


def certify(plan: PathSolution, params: EnergyParams, zones: Sequence[ConvexPolygon], **soc_kw) -> SocProfile:
    """Both checks; raises CertificationError on the first failure."""
    prof = simulate_soc(plan, params, **soc_kw)
    check_zone_compliance(plan, zones).raise_if_failed()
    return prof
