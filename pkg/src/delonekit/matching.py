"""Minimal-Lipschitz bijections and injections between finite point sets.

The objective in ``lipschitz`` mode is the largest distance ratio of the
assignment; in ``bilipschitz`` mode it is max(L, 1/b), the symmetric
distortion with the lower constant normalized to 1/L.  Either objective
only takes values in the finite set of pairwise distance ratios (and their
inverses), so binary search over the sorted candidates with a backtracking
feasibility oracle is exact.  This is a quadratic bottleneck assignment,
solved as a constraint search; no polynomial-time claim is made.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .distortion import BijectionTable
from .errors import CapacityError, ShapeError
from .geometry import PointSet

BRUTE_FORCE_CAP = 10 ** 7
EXACT_CANDIDATE_CAP = 5 * 10 ** 7   # |source pairs| * |target pairs|
HEURISTIC_OPS_PER_ITER = 50_000     # pair evaluations budgeted per iteration


@dataclass(frozen=True)
class MatchInstance:
    source: PointSet
    target: PointSet
    mode: str = "lipschitz"       # "lipschitz" | "bilipschitz"
    injection: bool = False       # allow |source| < |target|

    def __post_init__(self):
        if self.mode not in ("lipschitz", "bilipschitz"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if len(self.source) == 0 or len(self.target) == 0:
            raise ShapeError("source and target must be nonempty")
        if self.injection:
            if len(self.source) > len(self.target):
                raise ShapeError(
                    f"injection needs |source| <= |target|, got "
                    f"{len(self.source)} > {len(self.target)}")
        elif len(self.source) != len(self.target):
            raise ShapeError(
                f"bijection needs equal sizes, got {len(self.source)} != "
                f"{len(self.target)}; pass injection=True to relax")


@dataclass
class MatchStats:
    nodes: int = 0
    seconds: float = 0.0


@dataclass(frozen=True)
class MatchResult:
    assignment: BijectionTable
    L_star: Fraction              # max distance ratio of the assignment
    b_star: Optional[Fraction]    # min distance ratio (None for singletons)
    objective: Fraction           # L_star, or max(L_star, 1/b_star) in bilipschitz mode
    optimal: bool
    stats: MatchStats


class _Workspace:
    """Distance tables shared by the searches; all integer numerator math."""

    def __init__(self, inst: MatchInstance):
        self.inst = inst
        self.ops = 0  # pair evaluations, for heuristic budgeting
        self.S = list(inst.source.numerators())
        self.T = list(inst.target.numerators())
        self.A = inst.source.denom
        self.B = inst.target.denom
        n, t = len(self.S), len(self.T)
        self.dS = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                d = max(abs(self.S[i][0] - self.S[j][0]),
                        abs(self.S[i][1] - self.S[j][1]))
                self.dS[i][j] = self.dS[j][i] = d
        self.dT = [[0] * t for _ in range(t)]
        for u in range(t):
            for v in range(u + 1, t):
                d = max(abs(self.T[u][0] - self.T[v][0]),
                        abs(self.T[u][1] - self.T[v][1]))
                self.dT[u][v] = self.dT[v][u] = d

    def ratio(self, dt: int, ds: int) -> Fraction:
        return Fraction(dt * self.A, ds * self.B)

    def assignment_table(self, perm: Sequence[int]) -> BijectionTable:
        pairs = [(self.S[i], self.T[perm[i]]) for i in range(len(perm))]
        return BijectionTable(pairs, self.A, self.B)

    def extremes(self, perm: Sequence[int]):
        """(max ratio pair, min ratio pair) as (dt, ds) integer witnesses."""
        hi = lo = None
        n = len(perm)
        self.ops += n * (n - 1) // 2
        for i in range(n):
            for j in range(i + 1, n):
                ds = self.dS[i][j]
                dt = self.dT[perm[i]][perm[j]]
                if hi is None or dt * hi[1] > hi[0] * ds:
                    hi = (dt, ds)
                if lo is None or dt * lo[1] < lo[0] * ds:
                    lo = (dt, ds)
        return hi, lo

    def objective_of(self, perm: Sequence[int]) -> Fraction:
        hi, lo = self.extremes(perm)
        if hi is None:
            return Fraction(1)  # single point: no pairs, by convention
        upper = self.ratio(*hi)
        if self.inst.mode == "lipschitz":
            return upper
        lower = self.ratio(*lo)
        return max(upper, 1 / lower)

    def candidate_thresholds(self) -> list[Fraction]:
        n, t = len(self.S), len(self.T)
        vals = set()
        for i in range(n):
            for j in range(i + 1, n):
                for u in range(t):
                    for v in range(u + 1, t):
                        r = self.ratio(self.dT[u][v], self.dS[i][j])
                        vals.add(r)
                        if self.inst.mode == "bilipschitz" and r > 0:
                            vals.add(1 / r)
        if self.inst.mode == "bilipschitz":
            vals = {v for v in vals if v >= 1}
            vals.add(Fraction(1))
        return sorted(vals)

    def result(self, perm: Sequence[int], optimal: bool, stats: MatchStats) -> MatchResult:
        hi, lo = self.extremes(perm)
        if hi is None:
            one = Fraction(1)
            return MatchResult(self.assignment_table(perm), one, None, one,
                               optimal, stats)
        upper = self.ratio(*hi)
        lower = self.ratio(*lo)
        obj = upper if self.inst.mode == "lipschitz" else max(upper, 1 / lower)
        return MatchResult(self.assignment_table(perm), upper, lower, obj,
                           optimal, stats)


def _search(ws: _Workspace, L: Fraction, b: Optional[Fraction],
            stats: MatchStats) -> Optional[list[int]]:
    """Backtracking with forward checking; returns a permutation or None.

    Variable order: decreasing constraint tightness (sum of inverse source
    distances).  Value order: increasing distance to the target centroid.
    Completeness certifies infeasibility when None is returned.
    """
    n, t = len(ws.S), len(ws.T)
    Ln, Ld = L.numerator, L.denominator
    if b is not None:
        bn, bd = b.numerator, b.denominator
    A, B = ws.A, ws.B

    def edge_ok(dt: int, ds: int) -> bool:
        # b * ds/A <= dt/B <= L * ds/A, by cross multiplication
        if dt * A * Ld > Ln * ds * B:
            return False
        if b is not None and dt * A * bd < bn * ds * B:
            return False
        return True

    tightness = []
    for i in range(n):
        tot = Fraction(0)
        for j in range(n):
            if j != i:
                tot += Fraction(1, ws.dS[i][j])
        tightness.append(tot)
    var_order = sorted(range(n), key=lambda i: (-tightness[i], ws.S[i]))

    cx = Fraction(sum(p[0] for p in ws.T), t)
    cy = Fraction(sum(p[1] for p in ws.T), t)
    centroid_key = [max(abs(Fraction(p[0]) - cx), abs(Fraction(p[1]) - cy))
                    for p in ws.T]
    val_order = sorted(range(t), key=lambda u: (centroid_key[u], ws.T[u]))

    assignment: dict[int, int] = {}

    def extend(depth: int, domains: list[set[int]]) -> bool:
        if depth == n:
            return True
        var = var_order[depth]
        for u in val_order:
            if u not in domains[depth]:
                continue
            stats.nodes += 1
            assignment[var] = u
            new_domains = []
            wiped = False
            for later in range(depth + 1, n):
                y = var_order[later]
                ds = ws.dS[var][y]
                dom = {v for v in domains[later]
                       if v != u and edge_ok(ws.dT[u][v], ds)}
                if not dom:
                    wiped = True
                    break
                new_domains.append(dom)
            if not wiped and extend(depth + 1, domains[:depth + 1] + new_domains):
                return True
            del assignment[var]
        return False

    if extend(0, [set(range(t)) for _ in range(n)]):
        return [assignment[i] for i in range(n)]
    return None


def feasible(inst: MatchInstance, L: Fraction,
             b: Optional[Fraction] = None) -> Optional[BijectionTable]:
    """An assignment meeting the constraints, or None (certified infeasible)."""
    L = Fraction(L)
    if L <= 0:
        raise ValueError("L must be positive")
    if b is not None:
        b = Fraction(b)
        if b > L:
            raise ValueError("need b <= L")
    ws = _Workspace(inst)
    perm = _search(ws, L, b, MatchStats())
    return None if perm is None else ws.assignment_table(perm)


def min_lipschitz(inst: MatchInstance, method: str = "exact",
                  seed: int = 0, iters: int = 200) -> MatchResult:
    """Minimal-objective assignment.

    exact: binary search over the sorted candidate thresholds with the
    backtracking oracle; optimal.  heuristic: seeded greedy start plus
    pairwise-swap local search with restarts; optimal=False.
    """
    ws = _Workspace(inst)
    stats = MatchStats()
    start = time.perf_counter()
    if len(ws.S) == 1:
        perm = [0]
        stats.seconds = time.perf_counter() - start
        return ws.result(perm, method == "exact", stats)
    if method == "exact":
        n, t = len(ws.S), len(ws.T)
        pair_product = (n * (n - 1) // 2) * (t * (t - 1) // 2)
        if pair_product > EXACT_CANDIDATE_CAP:
            raise CapacityError(
                f"exact threshold search would enumerate {pair_product} "
                f"candidate ratios (cap {EXACT_CANDIDATE_CAP}); use the "
                f"heuristic method for instances this large")
        cands = ws.candidate_thresholds()
        lo, hi = 0, len(cands) - 1
        best_perm = None
        # the largest candidate is always feasible for a bijection
        while lo <= hi:
            mid = (lo + hi) // 2
            t = cands[mid]
            b = 1 / t if inst.mode == "bilipschitz" else None
            perm = _search(ws, t, b, stats)
            if perm is not None:
                best_perm = perm
                hi = mid - 1
            else:
                lo = mid + 1
        if best_perm is None:
            raise ShapeError("no feasible assignment at any candidate threshold")
        stats.seconds = time.perf_counter() - start
        return ws.result(best_perm, True, stats)
    if method != "heuristic":
        raise ValueError(f"unknown method {method!r}")

    import random

    rng = random.Random(seed)
    n, t = len(ws.S), len(ws.T)
    ops_budget = max(1, iters) * HEURISTIC_OPS_PER_ITER

    def local_search(perm: list[int]) -> tuple[list[int], Fraction]:
        obj = ws.objective_of(perm)
        improved = True
        while improved and ws.ops < ops_budget:
            improved = False
            for i in range(n):
                if ws.ops >= ops_budget:
                    break
                for j in range(i + 1, n):
                    perm[i], perm[j] = perm[j], perm[i]
                    stats.nodes += 1
                    cand = ws.objective_of(perm)
                    if cand < obj:
                        obj = cand
                        improved = True
                    else:
                        perm[i], perm[j] = perm[j], perm[i]
            if inst.injection:
                unused = [u for u in range(t) if u not in set(perm)]
                for i in range(n):
                    for u in unused:
                        old = perm[i]
                        perm[i] = u
                        stats.nodes += 1
                        cand = ws.objective_of(perm)
                        if cand < obj:
                            obj = cand
                            unused[unused.index(u)] = old
                            improved = True
                        else:
                            perm[i] = old
        return perm, obj

    best_perm = None
    best_obj = None
    restarts = max(1, iters)
    while restarts > 0 and (best_perm is None or ws.ops < ops_budget):
        perm = list(rng.sample(range(t), n))
        perm, obj = local_search(perm)
        if best_obj is None or obj < best_obj:
            best_obj, best_perm = obj, list(perm)
        restarts -= 1
    stats.seconds = time.perf_counter() - start
    return ws.result(best_perm, False, stats)


def brute_force_min(inst: MatchInstance) -> MatchResult:
    """Exact optimum by full enumeration; the test oracle.

    Deterministic tie-break: smallest assignment tuple among optima.
    """
    ws = _Workspace(inst)
    n, t = len(ws.S), len(ws.T)
    count = math.perm(t, n)
    if count > BRUTE_FORCE_CAP:
        raise CapacityError(f"{count} injections exceed the cap {BRUTE_FORCE_CAP}")
    stats = MatchStats()
    start = time.perf_counter()
    if n == 1:
        stats.seconds = time.perf_counter() - start
        return ws.result([0], True, stats)
    best_perm = None
    best_obj = None
    for perm in itertools.permutations(range(t), n):
        stats.nodes += 1
        obj = ws.objective_of(perm)
        if best_obj is None or obj < best_obj or (obj == best_obj and perm < tuple(best_perm)):
            best_obj, best_perm = obj, list(perm)
    stats.seconds = time.perf_counter() - start
    return ws.result(best_perm, True, stats)
