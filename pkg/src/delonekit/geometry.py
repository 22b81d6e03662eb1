"""Exact sup-norm geometry over scaled integer grids.

Conventions used throughout the package:

* Points are exact rationals.  A :class:`PointSet` stores integer numerators
  over one common positive denominator, so a stored pair ``(x, y)`` is the
  point ``(x/denom, y/denom)``.  No floating point enters membership,
  distance, or separation decisions.
* The metric is the supremum norm ``max(|dx|, |dy|)``; its balls are
  axis-aligned squares.  That is what makes the half-step covering-radius
  scan below exact.
* Balls and annuli carry explicit open/closed flags; callers pick the
  convention instead of relying on a hidden default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .errors import CapacityError, EmptyInput

Pair = tuple[Fraction, Fraction]

EXACT_SEPARATED_CAP = 30


def sup_dist(p, q) -> Fraction:
    """Sup-norm distance max(|dx|, |dy|); exact for int or Fraction inputs."""
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def sup_norm(p) -> Fraction:
    return max(abs(p[0]), abs(p[1]))


@dataclass(frozen=True)
class Box:
    """Sup-norm ball: the axis-aligned square of half-side ``radius``."""

    center: Pair
    radius: Fraction
    closed: bool = True

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("box radius must be >= 0")

    def contains(self, p) -> bool:
        d = sup_dist(p, self.center)
        return d <= self.radius if self.closed else d < self.radius

    def boundary_distance(self, p) -> Fraction:
        """Distance from an inside point to the boundary of the square."""
        return self.radius - sup_dist(p, self.center)


@dataclass(frozen=True)
class Annulus:
    """Points y with inner < ||y - center|| <= outer."""

    center: Pair
    inner: Fraction
    outer: Fraction

    def __post_init__(self):
        if not (0 <= self.inner <= self.outer):
            raise ValueError("need 0 <= inner <= outer")

    def contains(self, p) -> bool:
        d = sup_dist(p, self.center)
        return self.inner < d <= self.outer


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0,x1] x [y0,y1]; half_open drops max edges."""

    x0: Fraction
    x1: Fraction
    y0: Fraction
    y1: Fraction
    half_open: bool = False

    def __post_init__(self):
        if self.x1 < self.x0 or self.y1 < self.y0:
            raise ValueError("rectangle has negative extent")

    def contains(self, p) -> bool:
        x, y = p
        if self.half_open:
            return self.x0 <= x < self.x1 and self.y0 <= y < self.y1
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    @property
    def area(self) -> Fraction:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains_rect(self, other: "Rect") -> bool:
        return (self.x0 <= other.x0 and other.x1 <= self.x1
                and self.y0 <= other.y0 and other.y1 <= self.y1)

    @staticmethod
    def from_box(b: Box) -> "Rect":
        cx, cy = b.center
        return Rect(cx - b.radius, cx + b.radius, cy - b.radius, cy + b.radius)


def as_region(region):
    """Accept a Box or Rect wherever a membership test is needed."""
    if isinstance(region, (Box, Rect)):
        return region
    raise TypeError(f"expected Box or Rect, got {type(region).__name__}")


@dataclass(frozen=True)
class Homothety:
    """The affine map x -> (x - center) / scale.

    With ``center`` the midpoint of an axis square of side ``scale`` it sends
    that square onto the unit square [-1/2, 1/2]^2.
    """

    scale: int
    center: Pair

    def apply(self, p) -> Pair:
        return (Fraction(p[0] - self.center[0], self.scale),
                Fraction(p[1] - self.center[1], self.scale))

    def invert(self, p) -> Pair:
        return (p[0] * self.scale + self.center[0],
                p[1] * self.scale + self.center[1])

    def apply_rect(self, r: Rect) -> Rect:
        x0, y0 = self.apply((r.x0, r.y0))
        x1, y1 = self.apply((r.x1, r.y1))
        return Rect(x0, x1, y0, y1, half_open=r.half_open)


class PointSet:
    """Immutable finite set of grid points with a coarse bucket index.

    The bucket cell size is one value unit (``denom`` numerator steps); the
    index only accelerates queries, correctness never depends on it.
    """

    __slots__ = ("denom", "_sorted", "_set", "_buckets")

    def __init__(self, numerators: Iterable[tuple[int, int]], denom: int = 1):
        if denom < 1:
            raise ValueError("denominator must be a positive integer")
        pts = sorted(numerators)
        for a, b in zip(pts, pts[1:]):
            if a == b:
                raise ValueError(f"duplicate point {a}")
        self.denom = denom
        self._sorted = tuple(pts)
        self._set = frozenset(pts)
        buckets: dict[tuple[int, int], list[tuple[int, int]]] = {}
        d = denom
        for p in pts:
            buckets.setdefault((p[0] // d, p[1] // d), []).append(p)
        self._buckets = buckets

    @classmethod
    def from_fractions(cls, points: Iterable[Pair]) -> "PointSet":
        pts = [(Fraction(x), Fraction(y)) for x, y in points]
        denom = 1
        for x, y in pts:
            denom = denom * x.denominator // math.gcd(denom, x.denominator)
            denom = denom * y.denominator // math.gcd(denom, y.denominator)
        nums = [(int(x * denom), int(y * denom)) for x, y in pts]
        return cls(nums, denom)

    def __len__(self) -> int:
        return len(self._sorted)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self._sorted)

    def __contains__(self, num_pair) -> bool:
        return num_pair in self._set

    def __eq__(self, other) -> bool:
        return (isinstance(other, PointSet) and self.denom == other.denom
                and self._set == other._set)

    def __hash__(self):
        return hash((self.denom, self._set))

    def __repr__(self):
        return f"PointSet({len(self)} points, denom={self.denom})"

    def numerators(self) -> tuple[tuple[int, int], ...]:
        return self._sorted

    def fractions(self) -> Iterator[Pair]:
        d = self.denom
        for x, y in self._sorted:
            yield (Fraction(x, d), Fraction(y, d))

    def to_fraction(self, num_pair) -> Pair:
        return (Fraction(num_pair[0], self.denom), Fraction(num_pair[1], self.denom))

    def contains_fraction(self, p) -> bool:
        nx = Fraction(p[0]) * self.denom
        ny = Fraction(p[1]) * self.denom
        if nx.denominator != 1 or ny.denominator != 1:
            return False
        return (int(nx), int(ny)) in self._set

    def bounding_numerators(self) -> Optional[tuple[int, int, int, int]]:
        """(min_x, max_x, min_y, max_y) over numerators, or None if empty."""
        if not self._sorted:
            return None
        xs = [p[0] for p in self._sorted]
        ys = [p[1] for p in self._sorted]
        return (min(xs), max(xs), min(ys), max(ys))

    def _candidate_numerators(self, lo_x: int, hi_x: int, lo_y: int, hi_y: int):
        """Points from buckets overlapping the numerator rectangle."""
        d = self.denom
        if (hi_x - lo_x) * (hi_y - lo_y) >= len(self._sorted) * d * d:
            yield from self._sorted
            return
        for cx in range(lo_x // d, hi_x // d + 1):
            for cy in range(lo_y // d, hi_y // d + 1):
                for p in self._buckets.get((cx, cy), ()):
                    yield p

    def _region_numerator_bounds(self, region) -> tuple[int, int, int, int]:
        """Exact inclusive numerator bounds equivalent to region membership.

        Sup-norm balls and axis rectangles are both conjunctions of interval
        conditions per coordinate, so membership of a grid point reduces to
        integer range checks; open/half-open edges shift a bound by one.
        """
        region = as_region(region)
        d = self.denom
        if isinstance(region, Box):
            cx, cy = region.center
            r = region.radius
            if region.closed:
                return (math.ceil((cx - r) * d), math.floor((cx + r) * d),
                        math.ceil((cy - r) * d), math.floor((cy + r) * d))
            return (math.floor((cx - r) * d) + 1, math.ceil((cx + r) * d) - 1,
                    math.floor((cy - r) * d) + 1, math.ceil((cy + r) * d) - 1)
        lo_x = math.ceil(region.x0 * d)
        lo_y = math.ceil(region.y0 * d)
        if region.half_open:
            return (lo_x, math.ceil(region.x1 * d) - 1,
                    lo_y, math.ceil(region.y1 * d) - 1)
        return (lo_x, math.floor(region.x1 * d),
                lo_y, math.floor(region.y1 * d))

    def query(self, region) -> "PointSet":
        """Members inside a Box or Rect; agrees with a full linear scan."""
        lo_x, hi_x, lo_y, hi_y = self._region_numerator_bounds(region)
        hits = [p for p in self._candidate_numerators(lo_x, hi_x, lo_y, hi_y)
                if lo_x <= p[0] <= hi_x and lo_y <= p[1] <= hi_y]
        return PointSet(hits, self.denom)

    def count(self, region) -> int:
        """Number of members inside the region, without building a new set."""
        lo_x, hi_x, lo_y, hi_y = self._region_numerator_bounds(region)
        return sum(1 for p in self._candidate_numerators(lo_x, hi_x, lo_y, hi_y)
                   if lo_x <= p[0] <= hi_x and lo_y <= p[1] <= hi_y)


def ball_query(ps: PointSet, b: Box) -> PointSet:
    return ps.query(b)


# ---------------------------------------------------------------------------
# Separated subsets


@dataclass(frozen=True)
class SeparatedSet:
    points: PointSet
    gap: Fraction
    mode: str  # "exact" | "greedy"


def _conflicts(pts: Sequence[tuple[int, int]], gap_num: Fraction) -> list[int]:
    """Bitmask adjacency: bit j set on row i when dist(i, j) < gap."""
    n = len(pts)
    adj = [0] * n
    for i in range(n):
        xi, yi = pts[i]
        for j in range(i + 1, n):
            dx = abs(pts[j][0] - xi)
            dy = abs(pts[j][1] - yi)
            if max(dx, dy) < gap_num:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def _max_independent_mask(adj: list[int], n: int) -> int:
    """Maximum independent set of the conflict graph, as a bitmask.

    Plain include/exclude branch and bound; fine for n <= 30.
    """
    best_mask = 0
    best_size = 0

    def grow(cand: int, cur: int, size: int):
        nonlocal best_mask, best_size
        if cand == 0:
            if size > best_size:
                best_size, best_mask = size, cur
            return
        if size + cand.bit_count() <= best_size:
            return
        v = (cand & -cand).bit_length() - 1
        bit = 1 << v
        grow(cand & ~bit & ~adj[v], cur | bit, size + 1)
        grow(cand & ~bit, cur, size)

    grow((1 << n) - 1, 0, 0)
    return best_mask


def max_separated_subset(ps: PointSet, gap: Fraction, mode: str = "greedy") -> SeparatedSet:
    """Subset with all pairwise sup-distances >= gap.

    greedy: maximal (no point of ``ps`` can be added).
    exact:  maximum cardinality; capped at 30 points (CapacityError above).
    """
    gap = Fraction(gap)
    pts = ps.numerators()
    gap_num = gap * ps.denom  # compare against integer numerator distances
    if mode == "greedy":
        kept: list[tuple[int, int]] = []
        for p in pts:
            if all(max(abs(p[0] - q[0]), abs(p[1] - q[1])) >= gap_num for q in kept):
                kept.append(p)
        return SeparatedSet(PointSet(kept, ps.denom), gap, "greedy")
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if len(pts) > EXACT_SEPARATED_CAP:
        raise CapacityError(
            f"exact separated-subset search capped at {EXACT_SEPARATED_CAP} points, got {len(pts)}")
    adj = _conflicts(pts, gap_num)
    mask = _max_independent_mask(adj, len(pts))
    chosen = [pts[i] for i in range(len(pts)) if mask >> i & 1]
    return SeparatedSet(PointSet(chosen, ps.denom), gap, "exact")


def max_separated_size(ps: PointSet, gap: Fraction, cap: int = EXACT_SEPARATED_CAP):
    """(size, exact_flag): exact cardinality when |ps| <= cap, else greedy."""
    if len(ps) <= cap:
        return len(max_separated_subset(ps, gap, "exact").points), True
    return len(max_separated_subset(ps, gap, "greedy").points), False


# ---------------------------------------------------------------------------
# Delone constants


@dataclass(frozen=True)
class DeloneConstants:
    """Separation (min pairwise distance) and covering radius over a window.

    ``separation`` is None for a singleton (undefined-as-infinity flag).
    The covering radius is evaluated on the half-step grid of the window,
    which is exact for sets on a uniform grid under the sup-norm: the
    distance-to-set function is piecewise linear with slopes +-1 per
    coordinate, so its local maxima sit on half-step coordinates.
    """

    separation: Optional[Fraction]
    covering_radius: Fraction
    separation_witness: Optional[tuple[Pair, Pair]]
    covering_witness: Pair


def _ring_cells(k: int):
    if k == 0:
        yield (0, 0)
        return
    for dx in range(-k, k + 1):
        yield (dx, -k)
        yield (dx, k)
    for dy in range(-k + 1, k):
        yield (-k, dy)
        yield (k, dy)


class _NearestIndex:
    """Ring-expanding nearest-point queries over scaled integer coordinates."""

    def __init__(self, pts: Sequence[tuple[int, int]], cell: int):
        self.cell = cell
        self.buckets: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for p in pts:
            self.buckets.setdefault((p[0] // cell, p[1] // cell), []).append(p)
        if self.buckets:
            xs = [k[0] for k in self.buckets]
            ys = [k[1] for k in self.buckets]
            self.key_bbox = (min(xs), max(xs), min(ys), max(ys))
        else:
            self.key_bbox = None

    def nearest(self, qx: int, qy: int, skip=None, stop_at_or_below=None):
        """(dist, point) minimizing sup-distance; never returns ``skip``.

        ``stop_at_or_below``: return as soon as some distance <= this bound is
        seen.  The returned distance is then only an upper bound on the true
        minimum, so callers may use it solely to decide "cannot matter".
        Returns (None, None) when the index is empty apart from ``skip``.
        """
        if self.key_bbox is None:
            return None, None
        cell = self.cell
        c0x, c0y = qx // cell, qy // cell
        bx0, bx1, by0, by1 = self.key_bbox
        max_k = 1 + max(abs(bx0 - c0x), abs(bx1 - c0x), abs(by0 - c0y), abs(by1 - c0y))
        best: Optional[int] = None
        best_p = None
        k = 0
        while k <= max_k:
            if best is not None and (k - 1) * cell >= best:
                break
            for cx, cy in _ring_cells(k):
                for p in self.buckets.get((c0x + cx, c0y + cy), ()):
                    if p == skip:
                        continue
                    d = max(abs(p[0] - qx), abs(p[1] - qy))
                    if best is None or d < best or (d == best and p < best_p):
                        best, best_p = d, p
                        if stop_at_or_below is not None and best <= stop_at_or_below:
                            return best, best_p
            k += 1
        return best, best_p


def min_pairwise_distance(ps: PointSet):
    """(distance, (p, q)) over distinct pairs, exact; None for < 2 points."""
    pts = ps.numerators()
    if len(pts) < 2:
        return None, None
    index = _NearestIndex(pts, ps.denom)
    best = None
    best_pair = None
    # Early exit only at the absolute floor (distinct numerators differ by
    # >= 1), so every per-point query below is an exact nearest neighbor.
    for p in pts:
        d, q = index.nearest(p[0], p[1], skip=p, stop_at_or_below=1)
        if d is not None and (best is None or d < best):
            best, best_pair = d, (p, q)
            if best <= 1:
                break
    return Fraction(best, ps.denom), (ps.to_fraction(best_pair[0]),
                                      ps.to_fraction(best_pair[1]))


def delone_constants(ps: PointSet, window) -> DeloneConstants:
    """Exact separation and covering radius of ``ps`` relative to ``window``.

    ``window`` is a Box or Rect.  Both statistics are computed on the
    members of ``ps`` inside the window; covering is tested against every
    half-step grid point of the window.
    """
    window = as_region(window)
    inside = ps.query(window)
    if len(inside) == 0:
        raise EmptyInput("no points of the set inside the window")

    separation, sep_witness = min_pairwise_distance(inside)

    # Work in the doubled numerator grid so half steps become integers.
    d2 = 2 * ps.denom
    scaled = [(2 * x, 2 * y) for x, y in inside.numerators()]
    index = _NearestIndex(scaled, d2)

    rect = Rect.from_box(window) if isinstance(window, Box) else window
    open_max = (isinstance(window, Box) and not window.closed) or (
        isinstance(window, Rect) and rect.half_open)
    open_min = isinstance(window, Box) and not window.closed
    lo_x = rect.x0 * d2
    hi_x = rect.x1 * d2
    lo_y = rect.y0 * d2
    hi_y = rect.y1 * d2
    x_lo = math.floor(lo_x) + 1 if open_min else math.ceil(lo_x)
    y_lo = math.floor(lo_y) + 1 if open_min else math.ceil(lo_y)
    x_hi = math.ceil(hi_x) - 1 if open_max else math.floor(hi_x)
    y_hi = math.ceil(hi_y) - 1 if open_max else math.floor(hi_y)
    x_range = range(x_lo, x_hi + 1)
    y_range = range(y_lo, y_hi + 1)

    # For the max over query points an early exit at the current worst is
    # sound: any distance <= worst proves the query cannot raise the max.
    worst = -1
    worst_q = None
    for qx in x_range:
        for qy in y_range:
            dist, _ = index.nearest(qx, qy, stop_at_or_below=worst)
            if dist is not None and dist > worst:
                worst = dist
                worst_q = (qx, qy)
    covering = Fraction(worst, d2)
    witness = (Fraction(worst_q[0], d2), Fraction(worst_q[1], d2))
    return DeloneConstants(separation, covering, sep_witness, witness)


def check_even_grid_property(ps: PointSet, window: Rect) -> list[tuple[int, int]]:
    """Lattice points of the window with an even coordinate that are missing.

    The property asserted: every integer point of the window whose x or y
    coordinate is even belongs to the set.  Only meaningful for denom == 1.
    Returns the violating points (empty list == property holds).
    """
    if ps.denom != 1:
        raise ValueError("even-grid property is defined for integer sets")
    bad = []
    for x in range(math.ceil(window.x0), math.floor(window.x1) + 1):
        for y in range(math.ceil(window.y0), math.floor(window.y1) + 1):
            if (x % 2 == 0 or y % 2 == 0) and (x, y) not in ps:
                bad.append((x, y))
    return bad
