"""Density-driven point sets on the integer lattice.

A validated scale schedule places disjoint even-anchored squares of sides
l_1 | l_2 | ...; each square is subdivided into m_n^2 cells of even side
s_n = l_n/m_n >= 16.  Every cell holds floor(local density integral) points:
the mandatory even-line skeleton (every point with an even x or even y
coordinate) plus quota-filling odd-odd extras.  Outside the squares the set
is the full integer lattice, so the result is uniformly discrete with
separation 1 and covering radius at most 1 on any window.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .density import Density, cell_quota
from .errors import AlignmentError, InfeasibleQuota, ScheduleError, StateError
from .geometry import (Box, Homothety, PointSet, Rect,
                       check_even_grid_property, delone_constants)

MIN_CELL_SIDE = 16  # guarantees quota >= |required| for densities >= 8/9


@dataclass(frozen=True)
class Level:
    l: int
    m: int
    anchor: tuple[int, int]

    @property
    def side(self) -> int:
        return self.l // self.m

    def square(self) -> Rect:
        ax, ay = self.anchor
        return Rect(Fraction(ax), Fraction(ax + self.l),
                    Fraction(ay), Fraction(ay + self.l))

    def homothety(self) -> Homothety:
        ax, ay = self.anchor
        half = self.l // 2
        return Homothety(self.l, (Fraction(ax + half), Fraction(ay + half)))

    def cell_anchor(self, index: int) -> tuple[int, int]:
        j, i = divmod(index, self.m)
        return (self.anchor[0] + i * self.side, self.anchor[1] + j * self.side)

    def cell_count(self) -> int:
        return self.m * self.m


@dataclass(frozen=True)
class ScaleSchedule:
    levels: tuple[Level, ...]

    @staticmethod
    def of(*triples) -> "ScaleSchedule":
        return ScaleSchedule(tuple(Level(l, m, (int(a[0]), int(a[1])))
                                   for l, m, a in triples))


def _squares_disjoint(a: Level, b: Level) -> bool:
    ax, ay = a.anchor
    bx, by = b.anchor
    return (ax + a.l < bx or bx + b.l < ax
            or ay + a.l < by or by + b.l < ay)


def validate_schedule(s: ScaleSchedule) -> list[str]:
    """All structural violations of the schedule; empty list means ok."""
    out: list[str] = []
    for i, lv in enumerate(s.levels):
        if lv.l <= 0 or lv.l % 2:
            out.append(f"level {i}: l={lv.l} not an even positive integer")
        if lv.m <= 0 or lv.m % 2:
            out.append(f"level {i}: m={lv.m} not an even positive integer")
        if lv.m > 0 and lv.l % lv.m:
            out.append(f"level {i}: {lv.m} ∤ {lv.l}")
            continue
        if lv.m > 0:
            side = lv.side
            if side % 2:
                out.append(f"level {i}: s={side} odd")
            if side < MIN_CELL_SIDE:
                out.append(f"level {i}: s={side} < {MIN_CELL_SIDE}")
        if lv.anchor[0] % 2 or lv.anchor[1] % 2:
            out.append(f"level {i}: anchor {lv.anchor} has odd coordinates")
    for i in range(len(s.levels) - 1):
        a, b = s.levels[i], s.levels[i + 1]
        if b.l % a.l:
            out.append(f"levels {i},{i + 1}: {a.l} ∤ {b.l}")
        if b.l < a.l:
            out.append(f"levels {i},{i + 1}: l decreasing ({a.l} > {b.l})")
        if b.m < a.m:
            out.append(f"levels {i},{i + 1}: m decreasing ({a.m} > {b.m})")
        if a.m and b.m and b.side < a.side:
            out.append(f"levels {i},{i + 1}: s decreasing ({a.side} > {b.side})")
    for i in range(len(s.levels)):
        for j in range(i + 1, len(s.levels)):
            if not _squares_disjoint(s.levels[i], s.levels[j]):
                out.append(f"levels {i},{j}: squares overlap")
    return out


# ---------------------------------------------------------------------------
# Cell fills


def required_points(anchor: tuple[int, int], side: int) -> frozenset[tuple[int, int]]:
    """Mandatory points of the half-open cell: even x or even y coordinate.

    With an even anchor the owned boundary (left column, bottom row) already
    lies inside this union, so the count is exactly (3/4) side^2.
    """
    ax, ay = anchor
    if ax % 2 or ay % 2:
        raise AlignmentError(f"cell anchor {anchor} must have even coordinates")
    if side <= 0 or side % 2:
        raise AlignmentError(f"cell side {side} must be even and positive")
    pts = set()
    for x in range(ax, ax + side, 2):
        for y in range(ay, ay + side):
            pts.add((x, y))
    for y in range(ay, ay + side, 2):
        for x in range(ax + 1, ax + side, 2):
            pts.add((x, y))
    return frozenset(pts)


def odd_odd_slots(anchor: tuple[int, int], side: int) -> list[tuple[int, int]]:
    """Optional slots of the cell in row-major order (bottom row first)."""
    ax, ay = anchor
    return [(x, y)
            for y in range(ay + 1, ay + side, 2)
            for x in range(ax + 1, ax + side, 2)]


@dataclass(frozen=True)
class CellFill:
    level_index: int
    cell_index: int
    anchor: tuple[int, int]
    side: int
    quota: int
    required: frozenset[tuple[int, int]]
    extras: tuple[tuple[int, int], ...]

    def points(self):
        return self.required.union(self.extras)


def fill_cell(anchor: tuple[int, int], side: int, quota: int,
              policy: str = "row_major", seed: int = 0,
              level_index: int = 0, cell_index: int = 0) -> CellFill:
    """Deterministic fill of one cell up to its quota."""
    req = required_points(anchor, side)
    capacity = side * side
    if quota < len(req) or quota > capacity:
        raise InfeasibleQuota(
            f"quota {quota} outside [{len(req)}, {capacity}] for side {side}")
    slots = odd_odd_slots(anchor, side)
    if policy == "seeded":
        rng = random.Random(seed)
        rng.shuffle(slots)
    elif policy != "row_major":
        raise ValueError(f"unknown fill policy {policy!r}")
    extras = tuple(slots[:quota - len(req)])
    return CellFill(level_index, cell_index, anchor, side, quota, req, extras)


# ---------------------------------------------------------------------------
# Whole-set construction


@dataclass(frozen=True)
class DeloneSet:
    schedule: ScaleSchedule
    density: Density
    window: Rect
    points: PointSet                       # materialized window, denom 1
    fills: dict[tuple[int, int], CellFill]  # (level_index, cell_index)
    policy: str
    seed: int

    def level_fills(self, level_index: int):
        lv = self.schedule.levels[level_index]
        return [self.fills[(level_index, ci)] for ci in range(lv.cell_count())]

    def materialized_covers(self, rect: Rect) -> bool:
        return self.window.contains_rect(rect)

    def square_points(self, level_index: int) -> list[tuple[int, int]]:
        """D intersected with the closed square of a level.

        Cell fills cover the half-open square; the right column and top row
        of the closed square are background lattice points.
        """
        lv = self.schedule.levels[level_index]
        if not self.materialized_covers(lv.square()):
            raise StateError(
                f"level {level_index} square not inside the materialized window")
        ax, ay = lv.anchor
        pts: list[tuple[int, int]] = []
        for fill in self.level_fills(level_index):
            pts.extend(fill.points())
        pts.extend((ax + lv.l, y) for y in range(ay, ay + lv.l + 1))
        pts.extend((x, ay + lv.l) for x in range(ax, ax + lv.l))
        return pts


def _derived_seed(seed: int, level_index: int, cell_index: int) -> int:
    return (seed * 1_000_003 + level_index * 8191 + cell_index) & (2 ** 63 - 1)


def _window_to_rect(window) -> Rect:
    if isinstance(window, Box):
        return Rect.from_box(window)
    if isinstance(window, Rect):
        return window
    raise TypeError("window must be a Box or Rect")


def build(rho: Density, schedule: ScaleSchedule, window,
          policy: str = "row_major", seed: int = 0) -> DeloneSet:
    """Materialize the density-driven set inside a window.

    Validates the schedule and the density range first; per-cell point
    counts equal the cell quotas exactly, and the background outside every
    square is the full integer lattice.
    """
    violations = validate_schedule(schedule)
    if violations:
        raise ScheduleError(violations)
    rho.certify_range()
    win = _window_to_rect(window)

    fills: dict[tuple[int, int], CellFill] = {}
    for li, lv in enumerate(schedule.levels):
        phi = lv.homothety()
        for ci in range(lv.cell_count()):
            ca = lv.cell_anchor(ci)
            cell = Rect(Fraction(ca[0]), Fraction(ca[0] + lv.side),
                        Fraction(ca[1]), Fraction(ca[1] + lv.side))
            quota = cell_quota(rho, phi, cell)
            fills[(li, ci)] = fill_cell(ca, lv.side, quota, policy,
                                        _derived_seed(seed, li, ci), li, ci)

    half_open_squares = [
        (lv.anchor[0], lv.anchor[0] + lv.l, lv.anchor[1], lv.anchor[1] + lv.l)
        for lv in schedule.levels]

    def in_half_open_square(x: int, y: int) -> bool:
        return any(x0 <= x < x1 and y0 <= y < y1
                   for x0, x1, y0, y1 in half_open_squares)

    lo_x, hi_x = math.ceil(win.x0), math.floor(win.x1)
    lo_y, hi_y = math.ceil(win.y0), math.floor(win.y1)
    pts: list[tuple[int, int]] = []
    for x in range(lo_x, hi_x + 1):
        for y in range(lo_y, hi_y + 1):
            if not in_half_open_square(x, y):
                pts.append((x, y))
    for fill in fills.values():
        for p in fill.points():
            if lo_x <= p[0] <= hi_x and lo_y <= p[1] <= hi_y:
                pts.append(p)

    return DeloneSet(schedule, rho, win, PointSet(pts, 1), fills, policy, seed)


# ---------------------------------------------------------------------------
# Audit


@dataclass(frozen=True)
class AuditReport:
    violations: list[dict]
    stats: dict

    @property
    def clean(self) -> bool:
        return not self.violations

    def of_category(self, category: str) -> list[dict]:
        return [v for v in self.violations if v["category"] == category]

    def to_json(self) -> dict:
        return {"violations": self.violations, "stats": self.stats}


def audit(d: DeloneSet) -> AuditReport:
    """Re-verify a materialized set against its own construction contract.

    Checks, per cell: recomputed quota and fill count; globally on the
    window: the even-line property, lattice boundary points of every cell,
    and the Delone constants (separation 1, covering radius <= 1).
    Violations are report content, never exceptions.
    """
    violations: list[dict] = []
    win = d.window

    for (li, ci), fill in sorted(d.fills.items()):
        lv = d.schedule.levels[li]
        phi = lv.homothety()
        ca = fill.anchor
        cell = Rect(Fraction(ca[0]), Fraction(ca[0] + fill.side),
                    Fraction(ca[1]), Fraction(ca[1] + fill.side))
        expected = cell_quota(d.density, phi, cell)
        if expected != fill.quota:
            violations.append({"category": "quota", "level": li, "cell": ci,
                               "stored": fill.quota, "recomputed": expected})
        if len(fill.points()) != fill.quota:
            violations.append({"category": "count", "level": li, "cell": ci,
                               "count": len(fill.points()),
                               "quota": fill.quota})

    for p in check_even_grid_property(d.points, win):
        violations.append({"category": "2Z2", "point": list(p)})

    lo_x, hi_x = math.ceil(win.x0), math.floor(win.x1)
    lo_y, hi_y = math.ceil(win.y0), math.floor(win.y1)
    for (li, ci), fill in sorted(d.fills.items()):
        ax, ay = fill.anchor
        s = fill.side
        boundary = set()
        for x in range(ax, ax + s + 1):
            boundary.add((x, ay))
            boundary.add((x, ay + s))
        for y in range(ay, ay + s + 1):
            boundary.add((ax, y))
            boundary.add((ax + s, y))
        for p in sorted(boundary):
            if lo_x <= p[0] <= hi_x and lo_y <= p[1] <= hi_y and p not in d.points:
                violations.append({"category": "boundary", "level": li,
                                   "cell": ci, "point": list(p)})

    consts = delone_constants(d.points, win)
    if consts.separation is not None and consts.separation != 1:
        violations.append({"category": "separation",
                           "value": str(consts.separation),
                           "witness": [list(map(str, w)) for w in consts.separation_witness]})
    if consts.covering_radius > 1:
        violations.append({"category": "covering",
                           "value": str(consts.covering_radius),
                           "witness": list(map(str, consts.covering_witness))})

    stats = {
        "points": len(d.points),
        "cells": len(d.fills),
        "separation": None if consts.separation is None else str(consts.separation),
        "covering_radius": str(consts.covering_radius),
    }
    return AuditReport(violations, stats)
