"""Renormalized patches, counting measures, pushforward, discrepancy,
mass-loss accounting, and the symmetric-difference band diagnostic.

A level-n patch is the exact affine image of the built set inside its
square, carried on the grid with denominator l_n inside the unit square.
Counting measures divide point counts by l_n^2; all measure values are
exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from mpmath import mp

from .construction import DeloneSet
from .density import Density
from .distortion import BijectionTable
from .errors import AlignmentError, DomainError, ShapeError
from .geometry import Box, Homothety, Pair, PointSet, Rect

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class NormalizedPatch:
    points: PointSet     # denominator = side
    level_index: int
    side: int            # l_n
    homothety: Homothety

    def identity_table(self) -> BijectionTable:
        return BijectionTable.identity(self.points)


def normalize_patch(d: DeloneSet, level_index: int) -> NormalizedPatch:
    """Exact image of the level's closed square under its homothety."""
    lv = d.schedule.levels[level_index]
    phi = lv.homothety()
    cx = int(phi.center[0])
    cy = int(phi.center[1])
    nums = [(x - cx, y - cy) for x, y in d.square_points(level_index)]
    return NormalizedPatch(PointSet(nums, lv.l), level_index, lv.l, phi)


def normalize_map(f: BijectionTable, patch: NormalizedPatch,
                  base: Pair) -> BijectionTable:
    """Rescale a lattice map to the unit square, anchored at a base point.

    ``f`` must be defined (with integer denominators 1) on every preimage of
    the patch; the result maps the patch grid to the same-denominator grid
    and sends ``base`` to the origin, which leaves all distance ratios
    unchanged.
    """
    if f.src_denom != 1 or f.tgt_denom != 1:
        raise ShapeError("normalize_map expects an integer-lattice map")
    base = (Fraction(base[0]), Fraction(base[1]))
    if not patch.points.contains_fraction(base):
        raise DomainError(f"base point {base} not in the patch")
    l = patch.side
    phi = patch.homothety
    base_src = tuple(int(c) for c in phi.invert(base))
    if base_src not in f.fwd:
        raise DomainError("map not defined at the base point's preimage")
    fb = f.fwd[base_src]
    pairs = []
    for v in patch.points:
        u = (v[0] + int(phi.center[0]), v[1] + int(phi.center[1]))
        if u not in f.fwd:
            raise DomainError(f"map not defined at {u}")
        fu = f.fwd[u]
        pairs.append((v, (fu[0] - fb[0], fu[1] - fb[1])))
    return BijectionTable(pairs, l, l)


# ---------------------------------------------------------------------------
# Counting measures


@dataclass(frozen=True)
class CountingMeasure:
    carrier: PointSet
    side: int  # normalizer is side^2

    @property
    def normalizer(self) -> int:
        return self.side * self.side

    def total(self) -> Fraction:
        return Fraction(len(self.carrier), self.normalizer)


def patch_measure(patch: NormalizedPatch) -> CountingMeasure:
    return CountingMeasure(patch.points, patch.side)


def grid_measure(side: int) -> CountingMeasure:
    """The counting measure of the full grid (1/side) Z^2 inside the closed
    unit square: (side + 1)^2 carrier points."""
    h = side // 2
    nums = [(x, y) for x in range(-h, h + 1) for y in range(-h, h + 1)]
    return CountingMeasure(PointSet(nums, side), side)


def measure(m: CountingMeasure, region) -> Fraction:
    """|carrier ∩ region| / side^2, exact and finitely additive."""
    return Fraction(m.carrier.count(region), m.normalizer)


def pushforward(f: BijectionTable, m: CountingMeasure, region) -> Fraction:
    """Measure of the preimage of a target region."""
    if set(f.fwd) != set(m.carrier.numerators()) or f.src_denom != m.carrier.denom:
        raise ShapeError("measure carrier must equal the map's source")
    hits = sum(1 for t in f.fwd.values()
               if region.contains(f.target_fraction(t)))
    return Fraction(hits, m.normalizer)


# ---------------------------------------------------------------------------
# Rectangle families and discrepancy


def dyadic_family(depth: int) -> list[tuple[str, Rect]]:
    """Half-open dyadic squares of the unit square, all depths 0..depth."""
    out = []
    for j in range(depth + 1):
        step = Fraction(1, 2 ** j)
        for iy in range(2 ** j):
            for ix in range(2 ** j):
                x0 = -HALF + ix * step
                y0 = -HALF + iy * step
                out.append((f"dyadic:{j}:{ix},{iy}",
                            Rect(x0, x0 + step, y0, y0 + step, half_open=True)))
    return out


def cells_family(d: DeloneSet, level_index: int) -> list[tuple[str, Rect]]:
    """Normalized half-open subdivision cells of a level, plus the full
    half-open unit square."""
    lv = d.schedule.levels[level_index]
    phi = lv.homothety()
    out = []
    for ci in range(lv.cell_count()):
        ca = lv.cell_anchor(ci)
        cell = Rect(Fraction(ca[0]), Fraction(ca[0] + lv.side),
                    Fraction(ca[1]), Fraction(ca[1] + lv.side), half_open=True)
        img = phi.apply_rect(cell)
        out.append((f"cell:{ci}", img))
    out.append(("square", Rect(-HALF, HALF, -HALF, HALF, half_open=True)))
    return out


@dataclass(frozen=True)
class DiscrepancyRow:
    rect_id: str
    rect: Rect
    mu: Fraction
    integral: float
    abs_error: float


@dataclass(frozen=True)
class DiscrepancyResult:
    sup_value: float
    argmax_id: str
    rows: tuple[DiscrepancyRow, ...]


def discrepancy(m: CountingMeasure, rho: Density,
                family: Sequence[tuple[str, Rect]]) -> DiscrepancyResult:
    """Sup over the family of |measure(A) - integral of rho over A|."""
    rows = []
    sup_value = 0.0
    argmax_id = ""
    for rect_id, rect in family:
        mu = measure(m, rect)
        res = rho.integrate(rect)
        if res.rational is not None:
            err = abs(mu - res.rational)
            integral = float(res.rational)
            abs_err = float(err)
        else:
            mu_mpf = mp.mpf(mu.numerator) / mu.denominator
            integral = float(res.value)
            abs_err = float(abs(mu_mpf - res.value))
        rows.append(DiscrepancyRow(rect_id, rect, mu, integral, abs_err))
        if abs_err > sup_value:
            sup_value = abs_err
            argmax_id = rect_id
    return DiscrepancyResult(sup_value, argmax_id, tuple(rows))


# ---------------------------------------------------------------------------
# Mass loss


@dataclass(frozen=True)
class MassLossReport:
    missing: PointSet
    normalized_mass: Fraction
    band_width: Fraction  # max distance of a missing point to the query boundary


def mass_loss(f: BijectionTable, q: Box, side: int) -> MassLossReport:
    """Target grid points of the query ball without a preimage.

    The query must be centred on the target grid (any coarser level grid is
    a subgrid, since sides divide each other).
    """
    if f.tgt_denom != side:
        raise ShapeError(f"map target denominator {f.tgt_denom} != {side}")
    cx = Fraction(q.center[0]) * side
    cy = Fraction(q.center[1]) * side
    if cx.denominator != 1 or cy.denominator != 1:
        raise AlignmentError(f"query center {q.center} not on the 1/{side} grid")
    r_num = Fraction(q.radius) * side
    lo_x = math.ceil(cx - r_num)
    hi_x = math.floor(cx + r_num)
    image = set(f.fwd.values())
    missing = []
    for x in range(lo_x, hi_x + 1):
        for y in range(math.ceil(cy - r_num), math.floor(cy + r_num) + 1):
            p = (Fraction(x, side), Fraction(y, side))
            if q.contains(p) and (x, y) not in image:
                missing.append((x, y))
    ps = PointSet(missing, side)
    band = Fraction(0)
    for x, y in missing:
        depth = q.boundary_distance((Fraction(x, side), Fraction(y, side)))
        if depth > band:
            band = depth
    return MassLossReport(ps, Fraction(len(missing), side * side), band)


# ---------------------------------------------------------------------------
# Symmetric-difference band


@dataclass(frozen=True)
class SymDiffReport:
    passed: bool
    band: Fraction                       # sup over sources of |g - h|
    worst_distance: Fraction             # max boundary distance over the symdiff
    witness: Optional[Pair]              # first failing point, if any
    symdiff_size: int


def _min_int_dist_to(points: set[tuple[int, int]], p: tuple[int, int],
                     bound: int) -> Optional[int]:
    """Smallest Chebyshev distance from p to the set, or None if > bound."""
    if not points:
        return None
    for k in range(1, bound + 1):
        if k == 1:
            ring = [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                    if (dx, dy) != (0, 0)]
        else:
            ring = []
            for dx in range(-k, k + 1):
                ring.extend([(dx, -k), (dx, k)])
            for dy in range(-k + 1, k):
                ring.extend([(-k, dy), (k, dy)])
        if any((p[0] + dx, p[1] + dy) in points for dx, dy in ring):
            return k
    return None


def symdiff_band(g: BijectionTable, h: BijectionTable) -> SymDiffReport:
    """Discrete band check for two maps sharing one source.

    Image regions are unions of closed grid cells (side 1/denom) centred at
    image points.  Every point of image(g) Δ image(h) must lie within
    sup|g - h| of the boundary of g's image region.  The distance of a grid
    point to that boundary is (k - 1/2)/denom, with k its Chebyshev grid
    distance to the nearest cell of the opposite occupancy class.
    """
    if set(g.fwd) != set(h.fwd) or g.src_denom != h.src_denom:
        raise ShapeError("maps must share an identical source")
    if g.tgt_denom != h.tgt_denom:
        raise ShapeError("maps must share one target grid")
    t = g.tgt_denom
    band = Fraction(0)
    for s, gs in g.fwd.items():
        hs = h.fwd[s]
        d = Fraction(max(abs(gs[0] - hs[0]), abs(gs[1] - hs[1])), t)
        if d > band:
            band = d
    im_g = set(g.fwd.values())
    im_h = set(h.fwd.values())
    delta = sorted(im_g ^ im_h)

    xs = [p[0] for p in im_g]
    ys = [p[1] for p in im_g]
    span = max(max(xs) - min(xs), max(ys) - min(ys)) + 2

    worst = Fraction(0)
    worst_p = None
    for p in delta:
        if p in im_g:
            # lost interior point: distance to the nearest hole or exterior
            k = _nearest_missing(im_g, p, span)
        else:
            k = _min_int_dist_to(im_g, p, span)
            if k is None:
                k = span + 1
        dist = Fraction(2 * k - 1, 2 * t)
        if dist > worst:
            worst = dist
            worst_p = p
    passed = worst <= band
    witness = None
    if not passed and worst_p is not None:
        witness = (Fraction(worst_p[0], t), Fraction(worst_p[1], t))
    return SymDiffReport(passed, band, worst, witness, len(delta))


def _nearest_missing(occupied: set[tuple[int, int]], p: tuple[int, int],
                     bound: int) -> int:
    """Chebyshev distance from p to the nearest grid point not occupied."""
    for k in range(1, bound + 1):
        for dx in range(-k, k + 1):
            if (p[0] + dx, p[1] - k) not in occupied:
                return k
            if (p[0] + dx, p[1] + k) not in occupied:
                return k
        for dy in range(-k + 1, k):
            if (p[0] - k, p[1] + dy) not in occupied:
                return k
            if (p[0] + k, p[1] + dy) not in occupied:
                return k
    return bound + 1
