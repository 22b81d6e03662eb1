import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delonekit.errors import CapacityError, EmptyInput
from delonekit.geometry import (Annulus, Box, PointSet, Rect, ball_query,
                                delone_constants, max_separated_subset,
                                min_pairwise_distance, sup_dist)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=8)
points = st.tuples(fractions, fractions)


def test_sup_dist_examples():
    assert sup_dist((0, 0), (3, -4)) == 4
    assert sup_dist((1, 1), (1, 1)) == 0
    assert sup_dist((2, 5), (7, 3)) == 5


@settings(max_examples=200)
@given(points, points)
def test_sup_dist_symmetry(p, q):
    assert sup_dist(p, q) == sup_dist(q, p)
    assert sup_dist(p, q) >= 0
    assert (sup_dist(p, q) == 0) == (p == q)


@settings(max_examples=200)
@given(points, points, points)
def test_sup_dist_triangle(p, q, r):
    assert sup_dist(p, r) <= sup_dist(p, q) + sup_dist(q, r)


def test_sup_dist_metric_axioms_thousand_triples():
    rng = random.Random(1000003)

    def rand_point():
        return (Fraction(rng.randint(-400, 400), rng.randint(1, 12)),
                Fraction(rng.randint(-400, 400), rng.randint(1, 12)))

    for _ in range(1000):
        p, q, r = rand_point(), rand_point(), rand_point()
        assert sup_dist(p, q) == sup_dist(q, p)
        assert sup_dist(p, r) <= sup_dist(p, q) + sup_dist(q, r)


def lattice_window(lo, hi):
    return PointSet([(x, y) for x in range(lo, hi + 1) for y in range(lo, hi + 1)])


def test_ball_query_lattice_block():
    ps = lattice_window(-3, 3)
    got = ball_query(ps, Box((Fraction(0), Fraction(0)), Fraction(5, 2)))
    assert len(got) == 25  # (2*floor(r)+1)^2


def test_ball_query_zero_radius_member():
    ps = lattice_window(-2, 2)
    got = ball_query(ps, Box((Fraction(1), Fraction(1)), Fraction(0)))
    assert got.numerators() == ((1, 1),)


def test_ball_query_matches_linear_scan_randomized():
    rng = random.Random(20240817)
    for _ in range(8):
        pts = set()
        while len(pts) < 200:
            pts.add((rng.randint(-40, 40), rng.randint(-40, 40)))
        denom = rng.choice([1, 2, 4])
        ps = PointSet(pts, denom)
        for _ in range(50):
            center = (Fraction(rng.randint(-80, 80), 2),
                      Fraction(rng.randint(-80, 80), 2))
            box = Box(center, Fraction(rng.randint(0, 30), 2),
                      closed=rng.random() < 0.5)
            got = set(ball_query(ps, box).numerators())
            want = {p for p in pts
                    if box.contains((Fraction(p[0], denom), Fraction(p[1], denom)))}
            assert got == want


def test_pointset_rejects_duplicates():
    with pytest.raises(ValueError):
        PointSet([(0, 0), (0, 0)])


def brute_max_separated(pts, gap):
    """Oracle: maximum cardinality over all subsets."""
    best = 0
    for r in range(len(pts), 0, -1):
        for sub in combinations(pts, r):
            if all(sup_dist(a, b) >= gap for a, b in combinations(sub, 2)):
                return r
        if best:
            break
    return 0


def test_separated_four_corners():
    ps = PointSet([(x, y) for x in range(3) for y in range(3)])
    res = max_separated_subset(ps, Fraction(2), "exact")
    assert len(res.points) == 4 == brute_max_separated(list(ps), 2)
    assert set(res.points.numerators()) == {(0, 0), (0, 2), (2, 0), (2, 2)}


def test_separated_singleton():
    ps = PointSet([(5, 7)])
    assert len(max_separated_subset(ps, Fraction(100), "exact").points) == 1
    assert len(max_separated_subset(ps, Fraction(100), "greedy").points) == 1


def test_separated_line():
    ps = PointSet([(x, 0) for x in range(5)])
    res = max_separated_subset(ps, Fraction(2), "exact")
    assert len(res.points) == 3 == brute_max_separated(list(ps), 2)


def test_separated_exact_matches_brute_randomized():
    rng = random.Random(99)
    for _ in range(25):
        pts = set()
        while len(pts) < rng.randint(3, 10):
            pts.add((rng.randint(0, 8), rng.randint(0, 8)))
        ps = PointSet(pts)
        gap = Fraction(rng.randint(1, 5))
        exact = len(max_separated_subset(ps, gap, "exact").points)
        greedy = len(max_separated_subset(ps, gap, "greedy").points)
        assert exact == brute_max_separated(sorted(pts), gap)
        assert exact >= greedy


def test_separated_greedy_is_maximal():
    rng = random.Random(3)
    pts = {(rng.randint(0, 20), rng.randint(0, 20)) for _ in range(60)}
    ps = PointSet(pts)
    gap = Fraction(3)
    kept = set(max_separated_subset(ps, gap, "greedy").points.numerators())
    for p in pts - kept:
        assert any(sup_dist(p, q) < gap for q in kept)


def test_separated_exact_monotone_in_gap():
    ps = PointSet([(x, y) for x in range(4) for y in range(4)])
    sizes = [len(max_separated_subset(ps, Fraction(g), "exact").points)
             for g in range(1, 6)]
    assert sizes == sorted(sizes, reverse=True)


def test_separated_capacity_cap():
    ps = PointSet([(x, y) for x in range(6) for y in range(6)])
    with pytest.raises(CapacityError):
        max_separated_subset(ps, Fraction(2), "exact")


def window(r):
    return Box((Fraction(0), Fraction(0)), Fraction(r))


def test_delone_constants_full_lattice():
    ps = lattice_window(-4, 4)
    c = delone_constants(ps, window(4))
    assert c.separation == 1
    assert c.covering_radius == Fraction(1, 2)


def test_delone_constants_even_line_union():
    pts = [(x, y) for x in range(-4, 5) for y in range(-4, 5)
           if x % 2 == 0 or y % 2 == 0]
    c = delone_constants(PointSet(pts), window(4))
    assert c.separation == 1
    assert c.covering_radius == 1
    wx, wy = c.covering_witness
    assert wx.denominator == 1 and wy.denominator == 1
    assert int(wx) % 2 != 0 and int(wy) % 2 != 0


def test_delone_constants_singleton():
    c = delone_constants(PointSet([(0, 0)]), window(1))
    assert c.separation is None
    assert c.covering_radius == 1


def test_delone_constants_empty_window():
    ps = PointSet([(10, 10)])
    with pytest.raises(EmptyInput):
        delone_constants(ps, window(1))


def test_separation_at_most_twice_covering():
    rng = random.Random(11)
    for _ in range(20):
        pts = {(rng.randint(-6, 6), rng.randint(-6, 6))
               for _ in range(rng.randint(2, 25))}
        ps = PointSet(pts)
        c = delone_constants(ps, window(6))
        if c.separation is not None and len(pts) > 1:
            # any point midway between the closest pair is covered
            assert c.separation <= 2 * c.covering_radius


def test_covering_radius_matches_brute_force():
    rng = random.Random(5)
    for _ in range(10):
        pts = {(rng.randint(-5, 5), rng.randint(-5, 5))
               for _ in range(rng.randint(1, 15))}
        ps = PointSet(pts)
        c = delone_constants(ps, window(5))
        # oracle: scan the half-step grid directly
        worst = Fraction(0)
        for qx in range(-10, 11):
            for qy in range(-10, 11):
                q = (Fraction(qx, 2), Fraction(qy, 2))
                d = min(sup_dist(q, p) for p in ps.fractions())
                worst = max(worst, d)
        assert c.covering_radius == worst


def test_min_pairwise_matches_brute():
    rng = random.Random(42)
    for _ in range(20):
        pts = {(rng.randint(-9, 9), rng.randint(-9, 9))
               for _ in range(rng.randint(2, 20))}
        ps = PointSet(pts, rng.choice([1, 2]))
        got, pair = min_pairwise_distance(ps)
        want = min(sup_dist(a, b) for a, b in combinations(ps.fractions(), 2))
        assert got == want
        assert sup_dist(*pair) == want


def test_annulus_membership():
    ann = Annulus((Fraction(0), Fraction(0)), Fraction(1), Fraction(2))
    assert not ann.contains((1, 0))     # inner boundary excluded
    assert ann.contains((2, 0))         # outer boundary included
    assert ann.contains((Fraction(3, 2), Fraction(1, 2)))
    assert not ann.contains((3, 0))


def test_rect_half_open():
    r = Rect(Fraction(0), Fraction(1), Fraction(0), Fraction(1), half_open=True)
    assert r.contains((0, 0))
    assert not r.contains((1, 0))
    assert not r.contains((0, 1))
    assert Rect(Fraction(0), Fraction(1), Fraction(0), Fraction(1)).contains((1, 1))
