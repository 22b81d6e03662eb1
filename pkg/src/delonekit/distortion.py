"""Per-map distortion statistics: Lipschitz constants, co-uniformity,
regularity constants, counting lower bounds, and the boundary-escape check.

Maps are finite bijection tables between scaled grids.  Every statistic is
computed in exact rational arithmetic; ratio comparisons use integer
cross-multiplication on numerator differences (the common denominator
factor cancels inside one table).
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (CapExceeded, DegenerateInput, InsufficientData,
                     PreconditionError, ShapeError)
from .geometry import (Annulus, Box, Pair, PointSet, max_separated_size,
                       min_pairwise_distance, _ring_cells)


class BijectionTable:
    """Finite invertible association between two scaled grids.

    Keys and values are integer numerator pairs over ``src_denom`` and
    ``tgt_denom`` respectively.  Total on its source and injective by
    construction; the inverse lookup is materialized.
    """

    __slots__ = ("src_denom", "tgt_denom", "fwd", "inv")

    def __init__(self, pairs, src_denom: int = 1, tgt_denom: int = 1):
        if src_denom < 1 or tgt_denom < 1:
            raise ShapeError("denominators must be positive integers")
        fwd: dict[tuple[int, int], tuple[int, int]] = {}
        inv: dict[tuple[int, int], tuple[int, int]] = {}
        items = pairs.items() if isinstance(pairs, dict) else pairs
        for src, tgt in items:
            src = (int(src[0]), int(src[1]))
            tgt = (int(tgt[0]), int(tgt[1]))
            if src in fwd:
                raise ShapeError(f"duplicate source point {src}")
            if tgt in inv:
                raise ShapeError(f"two sources map to target {tgt}")
            fwd[src] = tgt
            inv[tgt] = src
        self.src_denom = src_denom
        self.tgt_denom = tgt_denom
        self.fwd = fwd
        self.inv = inv

    @classmethod
    def identity(cls, ps: PointSet) -> "BijectionTable":
        return cls({p: p for p in ps}, ps.denom, ps.denom)

    def __len__(self) -> int:
        return len(self.fwd)

    def source_numerators(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.fwd))

    def target_numerators(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.inv))

    def source_pointset(self) -> PointSet:
        return PointSet(self.fwd.keys(), self.src_denom)

    def target_pointset(self) -> PointSet:
        return PointSet(self.inv.keys(), self.tgt_denom)

    def source_fraction(self, num) -> Pair:
        return (Fraction(num[0], self.src_denom), Fraction(num[1], self.src_denom))

    def target_fraction(self, num) -> Pair:
        return (Fraction(num[0], self.tgt_denom), Fraction(num[1], self.tgt_denom))

    def __repr__(self):
        return (f"BijectionTable({len(self.fwd)} points, "
                f"denoms {self.src_denom}->{self.tgt_denom})")


@dataclass(frozen=True)
class DistortionReport:
    """Extremal distance ratios of a table, with attaining witnesses.

    ``L`` is the largest ratio d_T(f x, f y)/d_S(x, y) over source pairs,
    ``b`` the smallest; witnesses are source-point pairs (as fractions).
    """

    L: Fraction
    b: Fraction
    witness_upper: tuple[Pair, Pair]
    witness_lower: tuple[Pair, Pair]


def _ratio(f: BijectionTable, dt: int, ds: int) -> Fraction:
    return Fraction(dt * f.src_denom, ds * f.tgt_denom)


def _full_scan(f: BijectionTable):
    pts = f.source_numerators()
    hi = lo = None  # (dt, ds, pair)
    for i in range(len(pts)):
        p = pts[i]
        fp = f.fwd[p]
        for j in range(i + 1, len(pts)):
            q = pts[j]
            fq = f.fwd[q]
            ds = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
            dt = max(abs(fp[0] - fq[0]), abs(fp[1] - fq[1]))
            if hi is None or dt * hi[1] > hi[0] * ds:
                hi = (dt, ds, (p, q))
            if lo is None or dt * lo[1] < lo[0] * ds:
                lo = (dt, ds, (p, q))
    return hi, lo


def _bucket_map(pts, cell: int):
    buckets: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for p in pts:
        buckets.setdefault((p[0] // cell, p[1] // cell), []).append(p)
    return buckets


def _pruned_scan(f: BijectionTable):
    """Same extremes as the full scan, skipping rings that cannot matter.

    For the upper ratio, pairs at source distance D have ratio at most
    diam(target)/D; for the lower ratio at least sep(target)/D.  Ring
    enumeration over the bucket grid turns both into sound stopping rules.
    """
    pts = f.source_numerators()
    cell = f.src_denom
    buckets = _bucket_map(pts, cell)
    keys = list(buckets)
    kx0 = min(k[0] for k in keys)
    kx1 = max(k[0] for k in keys)
    ky0 = min(k[1] for k in keys)
    ky1 = max(k[1] for k in keys)

    tgts = list(f.inv)
    diam_t = max(max(t[0] for t in tgts) - min(t[0] for t in tgts),
                 max(t[1] for t in tgts) - min(t[1] for t in tgts))
    sep_t, _ = min_pairwise_distance(f.target_pointset())
    sep_t_num = sep_t * f.tgt_denom  # integer-valued Fraction

    hi = lo = None
    for p in pts:
        fp = f.fwd[p]
        c0 = (p[0] // cell, p[1] // cell)
        k_max = 1 + max(abs(kx0 - c0[0]), abs(kx1 - c0[0]),
                        abs(ky0 - c0[1]), abs(ky1 - c0[1]))
        # ascending rings for the maximum ratio
        for k in range(0, k_max + 1):
            if hi is not None and k >= 2 and diam_t * hi[1] <= hi[0] * (k - 1) * cell:
                break
            for dc in _ring_cells(k):
                for q in buckets.get((c0[0] + dc[0], c0[1] + dc[1]), ()):
                    if q == p:
                        continue
                    fq = f.fwd[q]
                    ds = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
                    dt = max(abs(fp[0] - fq[0]), abs(fp[1] - fq[1]))
                    if hi is None or dt * hi[1] > hi[0] * ds:
                        hi = (dt, ds, (min(p, q), max(p, q)))
        # descending rings for the minimum ratio
        for k in range(k_max, 0, -1):
            if lo is not None and sep_t_num * lo[1] >= lo[0] * (k + 1) * cell:
                break
            for dc in _ring_cells(k):
                for q in buckets.get((c0[0] + dc[0], c0[1] + dc[1]), ()):
                    if q == p:
                        continue
                    fq = f.fwd[q]
                    ds = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
                    dt = max(abs(fp[0] - fq[0]), abs(fp[1] - fq[1]))
                    if lo is None or dt * lo[1] < lo[0] * ds:
                        lo = (dt, ds, (min(p, q), max(p, q)))
        # ring 0 never pruned for the minimum
        for q in buckets.get(c0, ()):
            if q == p:
                continue
            fq = f.fwd[q]
            ds = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
            dt = max(abs(fp[0] - fq[0]), abs(fp[1] - fq[1]))
            if lo is None or dt * lo[1] < lo[0] * ds:
                lo = (dt, ds, (min(p, q), max(p, q)))
    return hi, lo


def lipschitz_constants(f: BijectionTable, pruned: bool = False) -> DistortionReport:
    """Exact extremal distance ratios over all source pairs."""
    if len(f) < 2:
        raise DegenerateInput("need at least two source points")
    hi, lo = _pruned_scan(f) if pruned else _full_scan(f)
    return DistortionReport(
        L=_ratio(f, hi[0], hi[1]),
        b=_ratio(f, lo[0], lo[1]),
        witness_upper=(f.source_fraction(hi[2][0]), f.source_fraction(hi[2][1])),
        witness_lower=(f.source_fraction(lo[2][0]), f.source_fraction(lo[2][1])),
    )


# ---------------------------------------------------------------------------
# Co-uniformity


@dataclass(frozen=True)
class CoUniformityModulus:
    """Empirical inverse-image spread: for each radius r the largest source
    distance between two points whose images are within r of each other."""

    samples: tuple[tuple[Fraction, Fraction], ...]  # (r, omega_hat(r))
    fitted_exponent: float
    witnesses: tuple

    def sample_dict(self):
        return {r: w for r, w in self.samples}


def fit_loglog_slope(samples: Sequence[tuple[Fraction, Fraction]]) -> float:
    """Least-squares slope of log(omega) against log(r), zero values dropped."""
    xs = [math.log(float(r)) for r, w in samples if w > 0 and r > 0]
    ys = [math.log(float(w)) for r, w in samples if w > 0 and r > 0]
    if len(xs) < 2 or len(set(xs)) < 2:
        return float("nan")
    return statistics.linear_regression(xs, ys).slope


def modulus_from_samples(samples) -> CoUniformityModulus:
    """Wrap raw (r, omega) samples, e.g. synthetic moduli in tests."""
    frozen = tuple((Fraction(r), Fraction(w)) for r, w in samples)
    return CoUniformityModulus(frozen, fit_loglog_slope(frozen), ())


def co_uniformity(f: BijectionTable, radii: Sequence[Fraction]) -> CoUniformityModulus:
    """Empirical modulus over the given radii (positive, sorted ascending)."""
    radii = [Fraction(r) for r in radii]
    if any(r <= 0 for r in radii) or sorted(radii) != radii:
        raise ValueError("radii must be positive and sorted ascending")
    pts = f.source_numerators()
    pair_data = []  # (dt, ds, pair)
    for i in range(len(pts)):
        p = pts[i]
        fp = f.fwd[p]
        for j in range(i, len(pts)):
            q = pts[j]
            fq = f.fwd[q]
            ds = max(abs(p[0] - q[0]), abs(p[1] - q[1]))
            dt = max(abs(fp[0] - fq[0]), abs(fp[1] - fq[1]))
            pair_data.append((dt, ds, (p, q)))
    pair_data.sort(key=lambda e: e[0])
    samples = []
    witnesses = []
    idx = 0
    best_ds = 0
    best_pair = None
    for r in radii:
        dt_cap = r * f.tgt_denom  # dt <= r * tgt_denom
        while idx < len(pair_data) and pair_data[idx][0] <= dt_cap:
            if pair_data[idx][1] > best_ds:
                best_ds = pair_data[idx][1]
                best_pair = pair_data[idx][2]
            idx += 1
        samples.append((r, Fraction(best_ds, f.src_denom)))
        witnesses.append(best_pair)
    return CoUniformityModulus(tuple(samples), fit_loglog_slope(samples),
                               tuple(witnesses))


def order_gate(m: CoUniformityModulus, d: int) -> bool:
    """Finite-sample proxy for sub-power growth of order d.

    Passes when the fitted log-log slope stays at or below d - 0.1 and
    omega(r)/r^d is nonincreasing across the top octave of radii.  This is a
    declared heuristic: no finite sample can decide an asymptotic rate.
    """
    if len(m.samples) < 4:
        raise InsufficientData("need at least 4 samples")
    rs = [r for r, _ in m.samples]
    if max(rs) < 4 * min(rs):
        raise InsufficientData("samples must span at least two octaves")
    if math.isnan(m.fitted_exponent):
        raise InsufficientData("no positive samples to fit")
    if m.fitted_exponent > d - 0.1:
        return False
    top_cut = max(rs) / 2
    top = sorted((r, w) for r, w in m.samples if r >= top_cut)
    ratios = [float(w) / float(r) ** d for r, w in top]
    return all(b <= a * (1 + 1e-12) for a, b in zip(ratios, ratios[1:]))


# ---------------------------------------------------------------------------
# Regularity constants


@dataclass(frozen=True)
class RegularityEstimate:
    """Smallest C such that no sampled ball's preimage holds a C*r-separated
    subset of more than C points; C-1 fails on some sampled ball.

    Relation to the covering-count regularity constant (preimages coverable
    by C balls of radius C*r): that constant is at most this one, and this
    one is at most twice it.  Separated subsets are exactly computable,
    minimum ball covers are not, hence this is the primary statistic.
    """

    constant: int
    approximate: bool            # greedy fallback used on some preimage
    certificates: tuple          # per-ball (center, radius, preimage, sep size)
    failing_below: Optional[tuple]  # witness that constant-1 fails


def _preimage(f: BijectionTable, ball: Box) -> PointSet:
    hits = [s for s, t in f.fwd.items()
            if ball.contains(f.target_fraction(t))]
    return PointSet(hits, f.src_denom)


def regularity_constant(f: BijectionTable, balls: Sequence[tuple[Pair, Fraction]],
                        search_cap: int = 16) -> RegularityEstimate:
    """Search C = 1..search_cap against closed target balls.

    Exact separated-subset search on preimages of at most 30 points; larger
    preimages fall back to greedy and mark the estimate approximate.
    """
    ball_boxes = [Box((Fraction(c[0]), Fraction(c[1])), Fraction(r)) for c, r in balls]
    preimages = [_preimage(f, b) for b in ball_boxes]
    approximate = False
    failing = None
    for c_try in range(1, search_cap + 1):
        certificates = []
        ok = True
        worst = None
        for b, pre in zip(ball_boxes, preimages):
            if len(pre) == 0:
                certificates.append((b.center, b.radius, 0, 0, True))
                continue
            size, exact = max_separated_size(pre, c_try * b.radius)
            approximate = approximate or not exact
            certificates.append((b.center, b.radius, len(pre), size, exact))
            if size > c_try:
                ok = False
                worst = (b.center, b.radius, size)
        if ok:
            return RegularityEstimate(c_try, approximate, tuple(certificates), failing)
        failing = worst
    raise CapExceeded(f"no regularity constant up to {search_cap} works")


def counting_lower_bound(source: PointSet, target_spacing: Fraction,
                         radii: Sequence[Fraction]) -> Fraction:
    """Certified lower bound on the Lipschitz constant of any injection into
    a lattice of the given spacing.

    A ball of radius r around a source point holds N points; an L-Lipschitz
    injection squeezes them into at most (2*floor(L r / t) + 1)^2 lattice
    sites around the image, so L >= q_min * t / r where q_min is the least
    q with (2q+1)^2 >= N.
    """
    if len(source) == 0:
        raise DegenerateInput("empty source")
    t = Fraction(target_spacing)
    best = Fraction(0)
    for p in source:
        center = source.to_fraction(p)
        for r in radii:
            r = Fraction(r)
            n = source.count(Box(center, r))
            if n <= 1:
                continue
            m = math.isqrt(n)
            if m * m < n:
                m += 1
            q_min = m // 2
            cand = Fraction(q_min) * t / r
            if cand > best:
                best = cand
    return best


# ---------------------------------------------------------------------------
# Boundary-escape diagnostic


@dataclass(frozen=True)
class EscapeLevel:
    index: int
    radius: Fraction
    skipped: bool
    x_star: Optional[Pair]
    image: Optional[Pair]
    boundary_distance: Optional[Fraction]
    within_step: Optional[bool]          # boundary_distance <= L / denom
    annulus_ok: Optional[bool]           # containment versus previous level
    annulus_witness: Optional[Pair]


@dataclass(frozen=True)
class EscapeDiagnostic:
    levels: tuple[EscapeLevel, ...]
    step: Fraction                        # L / denom
    parity_offset: tuple[int, int]

    @property
    def boundary_violations(self) -> list[EscapeLevel]:
        return [lv for lv in self.levels if lv.within_step is False]

    @property
    def annulus_violations(self) -> list[EscapeLevel]:
        return [lv for lv in self.levels if lv.annulus_ok is False]


def _detect_even_offset(f: BijectionTable) -> tuple[int, int]:
    """Parity class (px, py) whose columns/rows are fully present.

    The source grid must contain, within its bounding box, every point with
    x = px (mod 2) and every point with y = py (mod 2).
    """
    src = set(f.fwd)
    xs = [p[0] for p in src]
    ys = [p[1] for p in src]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    for px in (0, 1):
        for py in (0, 1):
            ok = True
            for x in range(x0, x1 + 1):
                for y in range(y0, y1 + 1):
                    if (x % 2 == px % 2 or y % 2 == py % 2) and (x, y) not in src:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                return (px, py)
    raise PreconditionError(
        "source is not a doubled-grid patch: no full even/odd line class")


def escape_check(f: BijectionTable, center: Pair, radii: Sequence[Fraction],
                 L: Fraction) -> EscapeDiagnostic:
    """Boundary-escape diagnostic over a nested family of closed balls.

    For each level j the maximal-norm preimage point x* (ties broken
    lexicographically) must land within L/denom of the level's boundary;
    additionally, preimage points of level j-1 whose norms fall strictly
    between ||x*_j|| and ||x*_{j-1}|| must map into level j-1 but not level
    j.  Empty levels are skipped with a marker.
    """
    if f.src_denom != f.tgt_denom:
        raise PreconditionError("normalized map must share one denominator")
    denom = f.src_denom
    radii = [Fraction(r) for r in radii]
    if any(r <= 0 for r in radii) or any(a <= b for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly descending")
    center = (Fraction(center[0]), Fraction(center[1]))
    parity = _detect_even_offset(f)

    src = set(f.fwd)
    xs = [p[0] for p in src]
    ys = [p[1] for p in src]
    bbox = (min(xs), max(xs), min(ys), max(ys))
    step = Fraction(L) / denom

    boxes = [Box(center, r) for r in radii]
    preimages: list[list[tuple[int, int]]] = []
    for box in boxes:
        pre = [p for p in sorted(src)
               if box.contains(f.target_fraction(f.fwd[p]))]
        preimages.append(pre)

    def norm_num(p) -> int:
        return max(abs(p[0]), abs(p[1]))

    stars: list[Optional[tuple[int, int]]] = []
    for pre in preimages:
        if not pre:
            stars.append(None)
            continue
        top = max(norm_num(p) for p in pre)
        stars.append(min(p for p in pre if norm_num(p) == top))

    levels = []
    for j, (r, box, pre, star) in enumerate(zip(radii, boxes, preimages, stars)):
        if star is None:
            levels.append(EscapeLevel(j, r, True, None, None, None, None, None, None))
            continue
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                if dx == dy == 0:
                    continue
                nx, ny = star[0] + dx, star[1] + dy
                if not (bbox[0] <= nx <= bbox[1] and bbox[2] <= ny <= bbox[3]):
                    raise PreconditionError(
                        f"argmax point {star} at level {j} touches the patch edge")
        image = f.target_fraction(f.fwd[star])
        bd = box.boundary_distance(image)
        within = bd <= step
        annulus_ok = None
        witness = None
        if j >= 1 and stars[j - 1] is not None:
            inner = Fraction(norm_num(star), denom)
            outer = Fraction(norm_num(stars[j - 1]), denom)
            if inner < outer:
                ann = Annulus((Fraction(0), Fraction(0)), inner, outer)
                annulus_ok = True
                for y in preimages[j - 1]:
                    yf = (Fraction(y[0], denom), Fraction(y[1], denom))
                    if not ann.contains(yf):
                        continue
                    fy = f.target_fraction(f.fwd[y])
                    if not boxes[j - 1].contains(fy) or boxes[j].contains(fy):
                        annulus_ok = False
                        witness = yf
                        break
            else:
                annulus_ok = True  # empty annulus
        levels.append(EscapeLevel(j, r, False,
                                  f.source_fraction(star), image, bd, within,
                                  annulus_ok, witness))
    return EscapeDiagnostic(tuple(levels), step, parity)
