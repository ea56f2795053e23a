"""Plain SVG plots: zones, planned segments coloured by mode, switch points and an SOC inset."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

from .graph import QuietZoneMap
from .model import PathSolution

FUEL = "#d62728"
ELECTRIC = "#1f77b4"
MIXED = "#9467bd"
MODE_COLOR = {"electric": ELECTRIC, "fuel": FUEL, "electric_first": MIXED, "fuel_first": MIXED,
              "interleaved": MIXED}


class _Canvas:
    def __init__(self, m: QuietZoneMap, plans: Sequence[PathSolution], width: float = 900.0, inset: bool = True):
        xs, ys = [], []
        for z in m.zones:
            xs += [v.x for v in z.vertices]
            ys += [v.y for v in z.vertices]
        for p in [m.source, m.goal, *m.targets]:
            if p is not None:
                xs.append(p.x)
                ys.append(p.y)
        for plan in plans:
            for s in plan.segments:
                xs += [s.start.x, s.end.x]
                ys += [s.start.y, s.end.y]
        self.x0, self.x1 = min(xs), max(xs)
        self.y0, self.y1 = min(ys), max(ys)
        span = max(self.x1 - self.x0, self.y1 - self.y0, 1e-9)
        pad = 0.04 * span
        self.x0 -= pad
        self.y0 -= pad
        self.x1 += pad
        self.y1 += pad
        self.k = width / (self.x1 - self.x0)
        self.w = width
        self.map_h = (self.y1 - self.y0) * self.k
        self.inset_h = 180.0 if inset else 0.0
        self.h = self.map_h + self.inset_h
        self.items: list[str] = []

    def pt(self, p) -> tuple[float, float]:
        return (p[0] - self.x0) * self.k, (self.y1 - p[1]) * self.k

    def add(self, s: str) -> None:
        self.items.append(s)

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.0f}" height="{self.h:.0f}" '
                f'viewBox="0 0 {self.w:.2f} {self.h:.2f}">')
        return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *self.items, "</svg>"]) + "\n"


def _zones(c: _Canvas, m: QuietZoneMap) -> None:
    for i, z in enumerate(m.zones):
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (c.pt(v) for v in z.vertices))
        c.add(f'<polygon class="zone" data-zone="{i}" points="{pts}" fill="#c7e9c0" stroke="#41ab5d"/>')


def _plan(c: _Canvas, plan: PathSolution, leg: int | None = None) -> None:
    tag = "" if leg is None else f' data-leg="{leg}"'
    for k, s in enumerate(plan.segments):
        (x1, y1), (x2, y2) = c.pt(s.start), c.pt(s.end)
        c.add(f'<line class="seg" data-seg="{k}"{tag} data-mode="{s.mode}" x1="{x1:.2f}" y1="{y1:.2f}" '
              f'x2="{x2:.2f}" y2="{y2:.2f}" stroke="{MODE_COLOR[s.mode]}" stroke-width="2"/>')
    for p in plan.switch_points:
        x, y = c.pt(p)
        c.add(f'<circle class="switch"{tag} cx="{x:.2f}" cy="{y:.2f}" r="4" fill="black"/>')


def _marker(c: _Canvas, p, label: str, color: str) -> None:
    x, y = c.pt(p)
    c.add(f'<circle class="terminal" cx="{x:.2f}" cy="{y:.2f}" r="6" fill="{color}"/>')
    c.add(f'<text class="label" x="{x + 8:.2f}" y="{y - 8:.2f}" font-size="14">{escape(label)}</text>')


def soc_profile_points(plans: Sequence[PathSolution], alpha: float, beta: float) -> list[tuple[float, float]]:
    """(distance, SOC) breakpoints of the reported schedule, including single-switch corners."""
    pts = [(0.0, plans[0].q_start)] if plans else []
    dist = 0.0
    for plan in plans:
        for s in plan.segments:
            if s.length <= 0:
                continue
            e = s.length - s.fuel
            if s.mode == "electric_first":
                pts.append((dist + e, s.q_start - alpha * e))
            elif s.mode == "fuel_first":
                pts.append((dist + s.fuel, s.q_start + beta * s.fuel))
            dist += s.length
            pts.append((dist, s.q_end))
    return pts


def _soc_inset(c: _Canvas, plans: Sequence[PathSolution], params) -> None:
    top = c.map_h + 20
    h = c.inset_h - 40
    left, right = 50.0, c.w - 20
    q_min, q_max = params.q_min, params.q_max
    c.add(f'<rect class="inset" x="{left}" y="{top:.2f}" width="{right - left:.2f}" height="{h:.2f}" '
          f'fill="none" stroke="#666"/>')
    pts = soc_profile_points(plans, params.alpha, params.beta)
    total = max(max((d for d, _ in pts), default=0.0), 1e-9)

    def xy(d, q):
        return left + (right - left) * d / total, top + h * (q_max - q) / (q_max - q_min)

    line = " ".join(f"{x:.2f},{y:.2f}" for x, y in (xy(d, q) for d, q in pts))
    c.add(f'<polyline class="soc" points="{line}" fill="none" stroke="black"/>')
    c.add(f'<text x="5" y="{top + 10:.2f}" font-size="11">{q_max:g}%</text>')
    c.add(f'<text x="5" y="{top + h:.2f}" font-size="11">{q_min:g}%</text>')


def path_svg(m: QuietZoneMap, plan: PathSolution | None, params=None) -> str:
    plans = [] if plan is None else [plan]
    c = _Canvas(m, plans, inset=bool(plans))
    _zones(c, m)
    if plan is not None:
        _plan(c, plan)
    _marker(c, m.source, "s", "#2ca02c")
    if m.goal is not None:
        _marker(c, m.goal, "g", "#ff7f0e")
    if plans:
        _soc_inset(c, plans, params or m.params)
    return c.render()


def tour_svg(m: QuietZoneMap, points, order: Sequence[int], legs: Sequence[PathSolution], params=None) -> str:
    c = _Canvas(m, legs, inset=bool(legs))
    _zones(c, m)
    for k, leg in enumerate(legs):
        _plan(c, leg, leg=k)
    for rank, node in enumerate(order):
        label = "s" if node == 0 else str(rank)
        _marker(c, points[node], label, "#2ca02c" if node == 0 else "#ff7f0e")
    if legs:
        _soc_inset(c, legs, params or m.params)
    return c.render()
