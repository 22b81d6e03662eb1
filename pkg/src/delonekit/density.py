"""Continuous densities on the unit square with certified range and integrals.

Every admissible density takes values in [8/9, 1] on I^2 = [-1/2, 1/2]^2.
Rectangle integrals come from closed-form antiderivatives.  Polynomial
variants (constant, bilinear, sampled grid) integrate to exact rationals;
the trigonometric variant evaluates its antiderivative with mpmath at a
fixed working precision of 50 significant digits and reports a rigorous
error bound for that evaluation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from mpmath import mp

from .errors import AmbiguousFloor, DomainError, FormatError, RangeError
from .geometry import Homothety, Rect

mp.dps = 50  # fixed working precision for transcendental evaluation

RANGE_LO = Fraction(8, 9)
RANGE_HI = Fraction(1)
HALF = Fraction(1, 2)

# Near-integer guard for floor extraction from inexact integrals.
FLOOR_GUARD = Fraction(1, 10 ** 9)


def unit_square() -> Rect:
    return Rect(-HALF, HALF, -HALF, HALF)


def _mpf_of(fr: Fraction):
    return mp.mpf(fr.numerator) / fr.denominator


def _closed_form_error():
    # A handful of rounded mpmath operations at 50 digits; generous cover.
    return mp.mpf(10) ** (-(mp.dps - 5))


@dataclass(frozen=True)
class IntegralResult:
    """Integral of a density over a rectangle.

    The true value lies within ``value +- error_bound``.  ``exact`` means the
    value came from a closed-form antiderivative (error from working
    precision only); ``rational`` is set when the closed form is an exact
    rational, in which case ``error_bound`` is zero.
    """

    value: object            # mpmath.mpf
    error_bound: object      # mpmath.mpf
    exact: bool
    rational: Optional[Fraction] = None


@dataclass(frozen=True)
class RangeCertificate:
    lo: Fraction
    hi: Fraction
    strict: bool  # lo < hi (the standing hypothesis for interesting builds)


def _certify(lo: Fraction, hi: Fraction, what: str) -> RangeCertificate:
    if lo < RANGE_LO:
        raise RangeError(f"{what}: minimum {lo} below 8/9")
    if hi > RANGE_HI:
        raise RangeError(f"{what}: maximum {hi} above 1")
    strict = lo < hi
    if not strict:
        warnings.warn(f"{what}: degenerate range (min == max == {lo})",
                      stacklevel=3)
    return RangeCertificate(lo, hi, strict)


class Density:
    """Base interface; concrete variants implement the three hooks."""

    def eval(self, p) -> object:
        x, y = Fraction(p[0]), Fraction(p[1])
        if not (-HALF <= x <= HALF and -HALF <= y <= HALF):
            raise DomainError(f"point {p} outside the unit square")
        return self._eval(x, y)

    def integrate(self, rect: Rect) -> IntegralResult:
        if not unit_square().contains_rect(rect):
            raise DomainError("rectangle not contained in the unit square")
        return _cached_integral(self, rect)

    def certify_range(self) -> RangeCertificate:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def _eval(self, x: Fraction, y: Fraction):
        raise NotImplementedError

    def _integrate(self, rect: Rect) -> IntegralResult:
        raise NotImplementedError


def _rational_result(v: Fraction) -> IntegralResult:
    return IntegralResult(_mpf_of(v), mp.mpf(0), True, v)


@lru_cache(maxsize=65536)
def _cached_integral(rho: "Density", rect: Rect) -> IntegralResult:
    # Densities and rectangles are immutable and hashable; results are too.
    return rho._integrate(rect)


@dataclass(frozen=True)
class Constant(Density):
    c: Fraction

    def _eval(self, x, y):
        return self.c

    def _integrate(self, rect):
        return _rational_result(self.c * rect.area)

    def certify_range(self):
        return _certify(self.c, self.c, f"constant c={self.c}")

    def to_json(self):
        return {"variant": "constant", "c": _rat_str(self.c)}


@dataclass(frozen=True)
class Bilinear(Density):
    """Bilinear interpolation of four corner values over the unit square.

    Corner order: (x0,y0), (x1,y0), (x0,y1), (x1,y1).
    """

    c00: Fraction
    c10: Fraction
    c01: Fraction
    c11: Fraction

    def _eval(self, x, y):
        s = x + HALF
        t = y + HALF
        return (self.c00 * (1 - s) * (1 - t) + self.c10 * s * (1 - t)
                + self.c01 * (1 - s) * t + self.c11 * s * t)

    def _integrate(self, rect):
        # A bilinear function integrates to area times its midpoint value.
        mid = ((rect.x0 + rect.x1) / 2, (rect.y0 + rect.y1) / 2)
        return _rational_result(self._eval(*mid) * rect.area)

    def certify_range(self):
        corners = (self.c00, self.c10, self.c01, self.c11)
        return _certify(min(corners), max(corners),
                        f"bilinear corners={corners}")

    def to_json(self):
        return {"variant": "bilinear",
                "corners": [_rat_str(c) for c in
                            (self.c00, self.c10, self.c01, self.c11)]}


@dataclass(frozen=True)
class TrigOscillation(Density):
    """rho(x, y) = 1 - (a/2) * (1 + sin(2 pi k x) sin(2 pi k y)).

    Range [1 - a, 1], both attained; the canonical strictly-oscillating test
    family with closed-form rectangle integrals.
    """

    k: int
    a: Fraction

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("frequency k must be a positive integer")
        if self.a < 0:
            raise ValueError("amplitude a must be >= 0")

    def _sin_is_zero(self, t: Fraction) -> bool:
        # sin(2 pi k t) == 0  iff  2 k t is an integer
        return (2 * self.k * t).denominator == 1

    def _eval(self, x, y):
        if self._sin_is_zero(x) or self._sin_is_zero(y):
            return 1 - self.a / 2
        two_pi_k = 2 * mp.pi * self.k
        s = mp.sin(two_pi_k * _mpf_of(x)) * mp.sin(two_pi_k * _mpf_of(y))
        return _mpf_of(Fraction(1)) - _mpf_of(self.a / 2) * (1 + s)

    def _cos_diff_zero(self, t0: Fraction, t1: Fraction) -> bool:
        # cos(2 pi k t0) == cos(2 pi k t1) iff k(t0 - t1) or k(t0 + t1) is
        # an integer (periodicity / evenness of cosine).
        return ((self.k * (t0 - t1)).denominator == 1
                or (self.k * (t0 + t1)).denominator == 1)

    def _integrate(self, rect):
        base = (1 - self.a / 2) * rect.area
        if self._cos_diff_zero(rect.x0, rect.x1) or self._cos_diff_zero(rect.y0, rect.y1):
            return _rational_result(base)
        two_pi_k = 2 * mp.pi * self.k
        cx = mp.cos(two_pi_k * _mpf_of(rect.x0)) - mp.cos(two_pi_k * _mpf_of(rect.x1))
        cy = mp.cos(two_pi_k * _mpf_of(rect.y0)) - mp.cos(two_pi_k * _mpf_of(rect.y1))
        cross = _mpf_of(self.a / 2) * cx * cy / (two_pi_k ** 2)
        return IntegralResult(_mpf_of(base) - cross, _closed_form_error(), True)

    def certify_range(self):
        return _certify(1 - self.a, Fraction(1),
                        f"trig oscillation k={self.k} a={self.a}")

    def to_json(self):
        return {"variant": "trig", "k": self.k, "a": _rat_str(self.a)}


class SampledGrid(Density):
    """Bilinear interpolation of an m x m grid of values spanning the square.

    Nodes sit at (-1/2 + i/(m-1), -1/2 + j/(m-1)); ``values`` is row-major
    in j (y) then i (x).  Bilinear interpolation attains its extrema at the
    nodes, so the range certificate needs no interpolation-error term.
    """

    def __init__(self, m: int, values: Sequence[Fraction]):
        if m < 2:
            raise ValueError("grid needs m >= 2")
        if len(values) != m * m:
            raise ValueError(f"expected {m * m} values, got {len(values)}")
        self.m = m
        self.values = tuple(Fraction(v) for v in values)

    def __eq__(self, other):
        return (isinstance(other, SampledGrid) and self.m == other.m
                and self.values == other.values)

    def __hash__(self):
        return hash(("SampledGrid", self.m, self.values))

    def _node(self, i: int, j: int) -> Fraction:
        return self.values[j * self.m + i]

    def _cell_of(self, u: Fraction) -> int:
        i = (u.numerator * (self.m - 1)) // u.denominator
        return min(max(i, 0), self.m - 2)

    def _eval(self, x, y):
        n = self.m - 1
        u = (x + HALF) * n
        v = (y + HALF) * n
        i = self._cell_of(Fraction(x + HALF))
        j = self._cell_of(Fraction(y + HALF))
        s = u - i
        t = v - j
        return (self._node(i, j) * (1 - s) * (1 - t)
                + self._node(i + 1, j) * s * (1 - t)
                + self._node(i, j + 1) * (1 - s) * t
                + self._node(i + 1, j + 1) * s * t)

    def _breaks(self, lo: Fraction, hi: Fraction) -> list[Fraction]:
        n = self.m - 1
        cuts = [lo]
        for i in range(1, n):
            node = -HALF + Fraction(i, n)
            if lo < node < hi:
                cuts.append(node)
        cuts.append(hi)
        return cuts

    def _integrate(self, rect):
        # Piecewise bilinear: split at node lines, then midpoint rule is
        # exact per piece.
        xs = self._breaks(rect.x0, rect.x1)
        ys = self._breaks(rect.y0, rect.y1)
        total = Fraction(0)
        for x0, x1 in zip(xs, xs[1:]):
            for y0, y1 in zip(ys, ys[1:]):
                area = (x1 - x0) * (y1 - y0)
                if area:
                    total += self._eval((x0 + x1) / 2, (y0 + y1) / 2) * area
        return _rational_result(total)

    def certify_range(self):
        return _certify(min(self.values), max(self.values),
                        f"sampled grid m={self.m}")

    def to_json(self):
        return {"variant": "grid", "m": self.m,
                "values": [_rat_str(v) for v in self.values]}


# ---------------------------------------------------------------------------
# Quota extraction


def cell_quota(rho: Density, phi: Homothety, cell: Rect) -> int:
    """Floor of the integral of rho∘phi over a subdivision cell.

    The integral is taken in source-square coordinates, i.e. the value is
    scale^2 times the integral of rho over phi(cell); a full cell of side s
    therefore yields a quota of at most s^2.  Exact rational integrals floor
    exactly; inexact ones refuse to guess when the value is within
    error_bound + 1e-9 of an integer.
    """
    image = phi.apply_rect(Rect(cell.x0, cell.x1, cell.y0, cell.y1))
    res = rho.integrate(image)
    scale = phi.scale * phi.scale
    if res.rational is not None:
        v = res.rational * scale
        return v.numerator // v.denominator
    value = res.value * scale
    err = res.error_bound * scale
    nearest = mp.nint(value)
    if abs(value - nearest) <= err + _mpf_of(FLOOR_GUARD):
        raise AmbiguousFloor(
            f"integral {mp.nstr(value, 25)} within {mp.nstr(err, 5)}+1e-9 of an integer")
    return int(mp.floor(value))


# ---------------------------------------------------------------------------
# JSON codec


def _rat_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"bad rational literal {s!r}") from exc
    raise FormatError(f"expected rational as int or 'p/q' string, got {s!r}")


def density_from_json(obj: dict) -> Density:
    try:
        variant = obj["variant"]
    except (TypeError, KeyError):
        raise FormatError("density spec missing 'variant'")
    if variant == "constant":
        return Constant(parse_rational(obj["c"]))
    if variant == "trig":
        k = obj["k"]
        if not isinstance(k, int) or k < 1:
            raise FormatError("trig density needs a positive integer 'k'")
        return TrigOscillation(k, parse_rational(obj["a"]))
    if variant == "bilinear":
        corners = obj["corners"]
        if len(corners) != 4:
            raise FormatError("bilinear density needs 4 corner values")
        return Bilinear(*(parse_rational(c) for c in corners))
    if variant == "grid":
        return SampledGrid(obj["m"], [parse_rational(v) for v in obj["values"]])
    raise FormatError(f"unknown density variant {variant!r}")
