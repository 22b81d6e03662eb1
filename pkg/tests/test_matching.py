import random
from fractions import Fraction

import pytest

from delonekit.distortion import counting_lower_bound, lipschitz_constants
from delonekit.errors import CapacityError, ShapeError
from delonekit.geometry import PointSet
from delonekit.matching import (MatchInstance, brute_force_min, feasible,
                                min_lipschitz)

F = Fraction


def ps(*pts, denom=1):
    return PointSet(pts, denom)


UNIT_SQUARE = ps((0, 0), (1, 0), (0, 1), (1, 1))
COLLINEAR = ps((0, 0), (1, 0), (2, 0), (3, 0))


def test_feasible_identity():
    inst = MatchInstance(UNIT_SQUARE, UNIT_SQUARE)
    table = feasible(inst, F(1))
    assert table is not None
    assert lipschitz_constants(table).L <= 1


def test_feasible_block_to_collinear_needs_three():
    inst = MatchInstance(UNIT_SQUARE, COLLINEAR)
    assert feasible(inst, F(2)) is None
    assert feasible(inst, F(3)) is not None


def test_feasible_snake():
    inst = MatchInstance(ps((0, 0), (1, 0), (2, 0), (3, 0)), UNIT_SQUARE)
    table = feasible(inst, F(1))
    assert table is not None
    assert lipschitz_constants(table).L <= 1


def test_min_lipschitz_identity_instance():
    res = min_lipschitz(MatchInstance(UNIT_SQUARE, UNIT_SQUARE))
    assert res.L_star == 1 and res.optimal


def test_min_lipschitz_block_to_collinear():
    res = min_lipschitz(MatchInstance(UNIT_SQUARE, COLLINEAR))
    assert res.L_star == 3
    assert res.objective == 3
    bf = brute_force_min(MatchInstance(UNIT_SQUARE, COLLINEAR))
    assert bf.objective == 3


def test_min_lipschitz_injection_vs_brute():
    source = ps((0, 0), (1, 0), (2, 0), (3, 0), (4, 0))
    target = ps((0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1))
    inst = MatchInstance(source, target, injection=True)
    exact = min_lipschitz(inst)
    brute = brute_force_min(inst)  # 720 injections
    assert exact.objective == brute.objective
    assert exact.L_star == brute.L_star


def test_brute_force_three_points():
    source = ps((0, 0), (2, 0), (0, 2))
    target = ps((0, 0), (1, 0), (0, 1))
    res = brute_force_min(MatchInstance(source, target))
    assert res.optimal and res.stats.nodes == 6
    assert res.objective == min_lipschitz(MatchInstance(source, target)).objective


def test_single_point_convention():
    res = brute_force_min(MatchInstance(ps((3, 4)), ps((7, 7))))
    assert res.L_star == 1 and res.b_star is None and res.objective == 1
    res2 = min_lipschitz(MatchInstance(ps((3, 4)), ps((7, 7))))
    assert res2.L_star == 1


def test_brute_force_capacity():
    big = ps(*[(x, y) for x in range(4) for y in range(3)])
    with pytest.raises(CapacityError):
        brute_force_min(MatchInstance(big, big))


def test_shape_errors():
    with pytest.raises(ShapeError):
        MatchInstance(ps((0, 0)), ps((0, 0), (1, 0)))
    with pytest.raises(ShapeError):
        MatchInstance(ps((0, 0), (1, 0)), ps((0, 0)), injection=True)
    with pytest.raises(ShapeError):
        MatchInstance(PointSet([]), ps((0, 0)))


def random_instance(rng):
    n = rng.randint(2, 7)
    injection = rng.random() < 0.4
    t = n + (rng.randint(1, 2) if injection else 0)
    mode = "bilipschitz" if rng.random() < 0.5 else "lipschitz"
    src = set()
    while len(src) < n:
        src.add((rng.randint(0, 6), rng.randint(0, 6)))
    tgt = set()
    while len(tgt) < t:
        tgt.add((rng.randint(0, 6), rng.randint(0, 6)))
    return MatchInstance(PointSet(src), PointSet(tgt), mode=mode,
                         injection=injection)


def test_exact_matches_brute_randomized():
    rng = random.Random(20250810)
    for _ in range(18):
        inst = random_instance(rng)
        exact = min_lipschitz(inst)
        brute = brute_force_min(inst)
        assert exact.objective == brute.objective, inst
        if inst.mode == "lipschitz":
            assert exact.L_star == brute.L_star


def test_lower_bound_below_optimum_randomized():
    rng = random.Random(99)
    for _ in range(15):
        inst = random_instance(rng)
        res = brute_force_min(inst)
        lb = counting_lower_bound(inst.source, F(1), [F(1), F(2), F(3)])
        assert lb <= res.L_star


def test_heuristic_never_beats_exact_and_mostly_matches():
    rng = random.Random(7)
    hits = 0
    total = 0
    for _ in range(15):
        inst = random_instance(rng)
        exact = min_lipschitz(inst)
        heur = min_lipschitz(inst, method="heuristic", seed=11, iters=10)
        assert not heur.optimal
        assert heur.objective >= exact.objective
        total += 1
        hits += heur.objective == exact.objective
    assert hits / total >= 0.8


def test_scale_invariance():
    rng = random.Random(55)
    for _ in range(8):
        inst = random_instance(rng)
        scaled = MatchInstance(
            PointSet([(3 * x, 3 * y) for x, y in inst.source.numerators()],
                     inst.source.denom * 2),
            PointSet([(3 * x, 3 * y) for x, y in inst.target.numerators()],
                     inst.target.denom * 2),
            mode=inst.mode, injection=inst.injection)
        a = min_lipschitz(inst)
        b = min_lipschitz(scaled)
        assert a.objective == b.objective
        assert ([(s, t) for s, t in sorted(a.assignment.fwd.items())]
                == [(tuple(c // 3 for c in s), tuple(c // 3 for c in t))
                    for s, t in sorted(b.assignment.fwd.items())])


def test_result_ratios_recomputed_independently():
    rng = random.Random(17)
    for _ in range(10):
        inst = random_instance(rng)
        res = min_lipschitz(inst)
        rep = lipschitz_constants(res.assignment)
        assert rep.L == res.L_star
        assert rep.b == res.b_star
