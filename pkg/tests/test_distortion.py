import math
import random
from fractions import Fraction
from itertools import combinations

import pytest

from delonekit.construction import ScaleSchedule, build
from delonekit.density import TrigOscillation
from delonekit.distortion import (BijectionTable, co_uniformity,
                                  counting_lower_bound, escape_check,
                                  lipschitz_constants, modulus_from_samples,
                                  order_gate, regularity_constant)
from delonekit.errors import (DegenerateInput, InsufficientData,
                              PreconditionError, ShapeError)
from delonekit.geometry import PointSet, Rect, sup_dist
from delonekit.measures import normalize_patch

F = Fraction


def lattice_table(lo, hi, mapping=None):
    pts = [(x, y) for x in range(lo, hi + 1) for y in range(lo, hi + 1)]
    mapping = mapping or {}
    return BijectionTable({p: mapping.get(p, p) for p in pts})


def swap_table(lo=-2, hi=2):
    return lattice_table(lo, hi, {(0, 0): (1, 0), (1, 0): (0, 0)})


# --- lipschitz constants ------------------------------------------------------


def test_lipschitz_identity():
    rep = lipschitz_constants(lattice_table(-2, 2))
    assert rep.L == 1 and rep.b == 1


def test_lipschitz_swap():
    rep = lipschitz_constants(swap_table())
    assert rep.L == 2
    p, q = rep.witness_upper
    f = swap_table()
    fp = f.fwd[(int(p[0]), int(p[1]))]
    fq = f.fwd[(int(q[0]), int(q[1]))]
    assert sup_dist(fp, fq) == 2 * sup_dist(p, q)


def test_lipschitz_table_rejects_non_injective():
    with pytest.raises(ShapeError):
        BijectionTable([((0, 0), (1, 1)), ((1, 0), (1, 1))])


def test_lipschitz_singleton_degenerate():
    with pytest.raises(DegenerateInput):
        lipschitz_constants(BijectionTable([((0, 0), (0, 0))]))


def test_lipschitz_common_scaling_invariance():
    pairs = [((x, y), (y, x)) for x in range(3) for y in range(3)]
    a = lipschitz_constants(BijectionTable(pairs, 1, 1))
    b = lipschitz_constants(BijectionTable(pairs, 4, 4))
    assert (a.L, a.b) == (b.L, b.b)


def test_lipschitz_pruned_matches_full():
    rng = random.Random(2718)
    for _ in range(20):
        pts = sorted({(rng.randint(-8, 8), rng.randint(-8, 8))
                      for _ in range(rng.randint(2, 40))})
        images = list(pts)
        rng.shuffle(images)
        f = BijectionTable(zip(pts, images), rng.choice([1, 2]), rng.choice([1, 3]))
        full = lipschitz_constants(f, pruned=False)
        fast = lipschitz_constants(f, pruned=True)
        assert (full.L, full.b) == (fast.L, fast.b)


# --- co-uniformity -------------------------------------------------------------


def test_couniformity_identity():
    mod = co_uniformity(lattice_table(-4, 4), [F(1), F(2), F(4)])
    assert mod.sample_dict() == {F(1): F(1), F(2): F(2), F(4): F(4)}


def test_couniformity_swap_r1():
    mod = co_uniformity(swap_table(), [F(1)])
    assert mod.sample_dict()[F(1)] == 2


def test_couniformity_monotone_and_inverse_bound():
    rng = random.Random(5)
    pts = sorted({(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(25)})
    images = list(pts)
    rng.shuffle(images)
    f = BijectionTable(zip(pts, images))
    radii = [F(1), F(2), F(4), F(8)]
    mod = co_uniformity(f, radii)
    values = [w for _, w in mod.samples]
    assert values == sorted(values)
    b = lipschitz_constants(f).b
    for r, w in mod.samples:
        assert w <= r / b


def test_couniformity_rejects_unsorted_radii():
    with pytest.raises(ValueError):
        co_uniformity(lattice_table(-1, 1), [F(2), F(1)])


# --- order gate -----------------------------------------------------------------


def synthetic(exponent):
    return modulus_from_samples([(F(r), F(r) ** exponent) for r in (1, 2, 4, 8)])


def test_order_gate_linear_passes():
    assert order_gate(synthetic(1), 2)


def test_order_gate_quadratic_fails():
    assert not order_gate(synthetic(2), 2)


def test_order_gate_three_halves_passes():
    mod = modulus_from_samples(
        [(F(r), F(math.isqrt(r ** 3)) if math.isqrt(r ** 3) ** 2 == r ** 3
          else F(round((r ** 3) ** 0.5 * 10 ** 6), 10 ** 6)) for r in (1, 4, 16, 64)])
    assert abs(mod.fitted_exponent - 1.5) < 1e-6
    assert order_gate(mod, 2)


def test_order_gate_identity_modulus_passes():
    mod = co_uniformity(lattice_table(-8, 8), [F(1), F(2), F(4), F(8)])
    assert order_gate(mod, 2)


def test_order_gate_insufficient():
    with pytest.raises(InsufficientData):
        order_gate(modulus_from_samples([(F(1), F(1)), (F(2), F(2))]), 2)
    with pytest.raises(InsufficientData):
        order_gate(modulus_from_samples(
            [(F(1), F(1)), (F(2), F(2)), (F(3), F(3)), (F(7, 2), F(3))]), 2)


# --- regularity -----------------------------------------------------------------


def brute_separated_size(ps, gap):
    pts = list(ps.fractions())
    for r in range(len(pts), 0, -1):
        for sub in combinations(pts, r):
            if all(sup_dist(a, b) >= gap for a, b in combinations(sub, 2)):
                return r
    return 0


def test_regularity_identity_is_three():
    f = lattice_table(-2, 2)  # 25 points: every preimage fits the exact cap
    balls = [((F(0), F(0)), F(r)) for r in (1, 2, 4)]
    est = regularity_constant(f, balls)
    assert est.constant == 3
    assert not est.approximate
    assert est.failing_below is not None


def test_regularity_matches_brute_on_small_balls():
    f = lattice_table(-2, 2)
    balls = [((F(0), F(0)), F(1)), ((F(1), F(1)), F(1))]
    est = regularity_constant(f, balls)
    for c_try in range(1, est.constant):
        assert any(
            brute_separated_size(
                PointSet([s for s, t in f.fwd.items()
                          if max(abs(t[0] - c[0] * 1), abs(t[1] - c[1])) <= r], 1),
                c_try * r) > c_try
            for (c, r) in balls)


def test_regularity_singleton_preimages():
    f = lattice_table(-2, 2)
    balls = [((F(x), F(y)), F(1, 2)) for x, y in [(0, 0), (1, -1)]]
    est = regularity_constant(f, balls)
    assert est.constant == 1


def test_regularity_folded_block():
    # fold x -> floor(x/2), interleave the parity bit into the row index
    pairs = {(x, y): (x // 2, 2 * y + x % 2)
             for x in range(6) for y in range(6)}
    f = BijectionTable(pairs)
    balls = [((F(1), F(5)), F(2)), ((F(1), F(6)), F(3)), ((F(2), F(4)), F(1))]
    est = regularity_constant(f, balls)
    assert est.constant >= 2
    assert est.constant == 2  # frozen from the exhaustive 36-point search
    assert not est.approximate


def test_regularity_greedy_fallback_flagged():
    f = lattice_table(-6, 6)
    balls = [((F(0), F(0)), F(4))]  # 81-point preimage exceeds the exact cap
    est = regularity_constant(f, balls)
    assert est.approximate


def test_regularity_prop_form_bound_for_perturbations():
    # regularity stays under max(2, C (L+1)^2) with C = 9*(9/8) + 1
    margin = F(9) * F(9, 8) + 1
    rng = random.Random(123)
    balls = [((F(0), F(0)), F(r)) for r in (1, 2)]
    for _ in range(10):
        a = (rng.randint(-2, 2), rng.randint(-2, 2))
        b = (rng.randint(-2, 2), rng.randint(-2, 2))
        if a == b:
            continue
        f = lattice_table(-3, 3, {a: b, b: a})
        L = lipschitz_constants(f).L
        est = regularity_constant(f, balls)
        assert est.constant <= max(2, margin * (L + 1) ** 2)


# --- counting lower bound --------------------------------------------------------


def test_lower_bound_full_block():
    ps = PointSet([(x, y) for x in range(-4, 5) for y in range(-4, 5)])
    assert counting_lower_bound(ps, F(1), [F(1), F(2), F(3)]) == 1


def test_lower_bound_half_spacing_grid():
    ps = PointSet([(x, y) for x in range(9) for y in range(9)], denom=2)
    assert counting_lower_bound(ps, F(1), [F(2)]) == 2


def test_lower_bound_cross():
    ps = PointSet([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)])
    assert counting_lower_bound(ps, F(1), [F(1)]) == 1


# --- escape check -----------------------------------------------------------------


def built_patch(l, m):
    rho = TrigOscillation(1, F(1, 9))
    sched = ScaleSchedule.of((l, m, (0, 0)))
    d = build(rho, sched, Rect(F(-2), F(l + 2), F(-2), F(l + 2)))
    return normalize_patch(d, 0)


def admissible_family(patch, rng, levels=5):
    """Nested closed balls whose preimages stay interior to the patch.

    With the base point within 2/l of -center, the outer preimage stays
    inside ||center + base|| + r0 + 1/l <= 2/l + r0 + 1/l of the origin, so
    any r0 <= 1/2 - 3/l keeps the interior condition satisfied.
    """
    l = patch.side
    k = rng.randint(3, 6)
    r0 = F(1, k)  # outermost radius, well inside the square
    step = F(rng.randint(1, 3), l)
    radii = [r0 - j * step for j in range(levels) if r0 - j * step > 0]
    cx = F(rng.randint(-l // 8, l // 8), l)
    cy = F(rng.randint(-l // 8, l // 8), l)
    return (cx, cy), radii


def base_near(patch, target):
    return min(patch.points.fractions(),
               key=lambda p: (sup_dist(p, target), p))


def identity_normalized(patch, base):
    bx = int(base[0] * patch.side)
    by = int(base[1] * patch.side)
    return BijectionTable({p: (p[0] - bx, p[1] - by) for p in patch.points},
                          patch.side, patch.side)


def test_escape_identity_zero_violations():
    patch = built_patch(32, 2)
    rng = random.Random(314)
    for _ in range(5):
        center, radii = admissible_family(patch, rng)
        base = base_near(patch, (-center[0], -center[1]))
        f = identity_normalized(patch, base)
        diag = escape_check(f, center, radii, F(1))
        assert diag.boundary_violations == []
        assert diag.annulus_violations == []
        assert any(not lv.skipped for lv in diag.levels)


def test_escape_empty_level_skipped():
    patch = built_patch(32, 2)
    base = base_near(patch, (F(0), F(0)))
    f = identity_normalized(patch, base)
    # innermost radius smaller than one grid step around an off-grid center
    radii = [F(1, 4), F(1, 8), F(1, 100)]
    diag = escape_check(f, (F(1, 64), F(1, 64)), radii, F(1))
    assert diag.levels[-1].skipped


def test_escape_teleport_fault_flagged():
    patch = built_patch(32, 2)
    base = base_near(patch, (F(0), F(0)))
    f = identity_normalized(patch, base)
    center, radii = (F(0), F(0)), [F(1, 4), F(3, 16), F(1, 8)]
    # teleport an interior deep point onto the center of the smallest ball
    deep = max((p for p in f.fwd if max(abs(p[0]), abs(p[1])) <= patch.side // 2 - 2),
               key=lambda p: (max(abs(p[0]), abs(p[1])), p))
    inner_owner = next(s for s, t in f.fwd.items() if t == (0, 0))
    pairs = dict(f.fwd)
    pairs[deep], pairs[inner_owner] = pairs[inner_owner], pairs[deep]
    g = BijectionTable(pairs, patch.side, patch.side)
    diag = escape_check(g, center, radii, F(1))
    assert diag.boundary_violations != []


def test_escape_precondition_interior():
    patch = built_patch(32, 2)
    base = base_near(patch, (F(0), F(0)))
    f = identity_normalized(patch, base)
    # a family reaching the patch edge violates the interior condition
    with pytest.raises(PreconditionError):
        escape_check(f, (F(0), F(0)), [F(1, 2)], F(1))


def test_escape_requires_doubled_grid_patch():
    pts = [(x, y) for x in range(-4, 5) for y in range(-4, 5)
           if (x % 2 == 1 and y % 2 == 1) or (x == 0 and y == 0)]
    f = BijectionTable.identity(PointSet(pts, 8))
    with pytest.raises(PreconditionError):
        escape_check(f, (F(0), F(0)), [F(1, 8)], F(1))
