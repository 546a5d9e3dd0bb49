"""Second-stage problem with a fixed first matching, via exact red-blue matching.

The randomized engine is the isolation-lemma scheme: random edge weights
make the minimum-weight perfect matching with ``k`` red edges unique with
probability at least 1/2, and the 2-adic valuation of a determinant
coefficient exposes it.  All arithmetic is exact (GMP integers for the
determinants, fractions for interpolation).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from gmpy2 import mpz

from .core import INF, Cost, Edge, ExactMatchingInstance, Instance, InstanceError, Matching, matching

DEFAULT_MAX_N = 12
DEFAULT_MAX_COST = 1000


class BudgetError(InstanceError):
    """Instance too large or costs too large for the exact big-integer engine."""


def bareiss_det(mat: list[list[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    n = len(mat)
    if n == 0:
        return 1
    a = [row[:] for row in mat]
    sign = 1
    prev = 1
    for c in range(n - 1):
        if a[c][c] == 0:
            for r in range(c + 1, n):
                if a[r][c] != 0:
                    a[c], a[r] = a[r], a[c]
                    sign = -sign
                    break
            else:
                return 0
        piv = a[c][c]
        for r in range(c + 1, n):
            ar = a[r]
            arc = ar[c]
            ac = a[c]
            for s in range(c + 1, n):
                ar[s] = (ar[s] * piv - arc * ac[s]) // prev
            ar[c] = 0
        prev = piv
    return sign * a[n - 1][n - 1]


def interpolate(values: list[int]) -> list[int]:
    """Integer coefficients of the polynomial through ``(x, values[x])`` for ``x = 0..len-1``."""
    m = len(values)
    # Newton divided differences on nodes 0..m-1
    dd = [Fraction(v) for v in values]
    for lvl in range(1, m):
        for x in range(m - 1, lvl - 1, -1):
            dd[x] = (dd[x] - dd[x - 1]) / lvl
    coeffs = [Fraction(0)] * m
    # Horner expansion of sum dd[l] * prod_{t<l} (y - t)
    for lvl in range(m - 1, -1, -1):
        # coeffs = coeffs * (y - lvl) + dd[lvl]
        nxt = [Fraction(0)] * m
        for p in range(m - 1):
            nxt[p + 1] += coeffs[p]
            nxt[p] -= coeffs[p] * lvl
        nxt[0] += dd[lvl]
        coeffs = nxt
    out = []
    for c in coeffs:
        if c.denominator != 1:
            raise ArithmeticError("interpolated coefficient is not an integer")
        out.append(int(c))
    return out


def _v2(x: int) -> int:
    return (x & -x).bit_length() - 1


def _red_matrix(n: int, entries: Mapping[Edge, tuple[int, bool]], y: int,
                skip_row: int = 0, skip_col: int = 0) -> list[list[int]]:
    rows = [i for i in range(1, n + 1) if i != skip_row]
    cols = [j for j in range(1, n + 1) if j != skip_col]
    ci = {j: b for b, j in enumerate(cols)}
    ri = {i: a for a, i in enumerate(rows)}
    mat = [[0] * len(cols) for _ in rows]
    for (i, j), (w, red) in entries.items():
        if i in ri and j in ci:
            mat[ri[i]][ci[j]] = mpz(y if red else 1) << w
    return mat


@dataclass(frozen=True)
class RedPolynomialDeterminant:
    coefficients: tuple  # coefficient of y^r at index r


def red_polynomial(n: int, entries: Mapping[Edge, tuple[int, bool]],
                   skip_row: int = 0, skip_col: int = 0) -> RedPolynomialDeterminant:
    """``det`` of the matrix with entries ``2^w * y^[red]`` as exact coefficients in ``y``.

    ``entries`` maps ``(i, j)`` to ``(w, red)``.  With ``skip_row/skip_col``
    the corresponding minor is taken instead.
    """
    size = n - (1 if skip_row else 0)
    vals = [int(bareiss_det(_red_matrix(n, entries, y, skip_row, skip_col))) for y in range(size + 1)]
    return RedPolynomialDeterminant(tuple(interpolate(vals)))


@dataclass
class ExactMatchingResult:
    matching: Optional[Matching]
    cost: Optional[int]
    trials: int
    successes: int
    error_bound: float  # probability that a NONE answer is wrong
    trial_outcomes: list = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.matching is not None


def _check_budget(g: ExactMatchingInstance, max_n: int, max_cost: int) -> None:
    if max(g.nl, g.nr) > max_n:
        raise BudgetError(f"n={max(g.nl, g.nr)} exceeds the big-integer budget {max_n}")
    if g.costs is not None and g.costs and max(g.costs.values()) > max_cost:
        raise BudgetError(f"costs up to {max(g.costs.values())} exceed the polynomial bound {max_cost}")


def _isolate(g: ExactMatchingInstance, targets: Iterable[int], rng: random.Random) -> dict[int, Optional[Matching]]:
    """One isolation round shared by several red-count targets.

    The weights, the determinant polynomial and the minors do not depend on
    the target, so a single round answers every ``r`` in ``targets``.
    """
    n, m = g.nl, len(g.edges)
    targets = list(targets)
    if n == 0:
        return {r: (frozenset() if r == 0 else None) for r in targets}
    big_k = 2 * m * n + 1
    entries = {}
    for e in sorted(g.edges):
        c = g.costs[e] if g.costs is not None else 0
        entries[e] = (c * big_k + rng.randint(1, 2 * m), e in g.red)
    coeffs = red_polynomial(n, entries).coefficients
    out: dict[int, Optional[Matching]] = {}
    minors: dict[Edge, tuple] = {}
    for r in targets:
        top = coeffs[r] if r < len(coeffs) else 0
        if top == 0:
            out[r] = None
            continue
        w_min = _v2(top)
        chosen = []
        for (i, j), (w, red) in entries.items():
            need = r - (1 if red else 0)
            if need < 0:
                continue
            if (i, j) not in minors:
                minors[(i, j)] = red_polynomial(n, entries, i, j).coefficients
            minor = minors[(i, j)]
            c = minor[need] if need < len(minor) else 0
            if c != 0 and _v2(c) + w == w_min:
                chosen.append((i, j))
        res = matching(chosen)
        ok = g.is_perfect_matching(res) and len(res & g.red) == r
        if ok and g.costs is not None and g.cost(res) != w_min // big_k:
            ok = False
        out[r] = res if ok else None
    return out


def mvv_trial(g: ExactMatchingInstance, rng: random.Random) -> Optional[Matching]:
    """One isolation round for target ``g.k``; returns a verified matching or ``None``."""
    return _isolate(g, [g.k], rng)[g.k]


def mvv_exact_matching(g: ExactMatchingInstance, trials: int = 40, seed: int = 0,
                       max_n: int = DEFAULT_MAX_N, max_cost: int = DEFAULT_MAX_COST,
                       run_all: bool = False) -> ExactMatchingResult:
    """Perfect matching with exactly ``g.k`` red edges (cheapest when costs are present).

    Stops at the first verified trial unless ``run_all``.  A ``None``
    matching is a Monte-Carlo answer whose error probability is at most
    ``2**-trials``.
    """
    _check_budget(g, max_n, max_cost)
    if trials < 1:
        raise InstanceError("trials must be positive")
    rng = random.Random(seed)
    found = None
    outcomes = []
    for _ in range(trials):
        res = mvv_trial(g, rng) if g.balanced else None
        outcomes.append(res is not None)
        if res is not None and found is None:
            found = res
            if not run_all:
                break
    succ = sum(outcomes)
    return ExactMatchingResult(found, None if found is None else g.cost(found), len(outcomes), succ,
                               0.0 if found is not None else 2.0 ** -len(outcomes), outcomes)


@dataclass
class TwoStageResult:
    matching: Optional[Matching]
    cost: Cost
    trials: int
    error_bound: float
    per_target: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.matching is not None


def reduce_2s_to_exact(inst: Instance, m1: Iterable[Edge], r: Optional[int] = None) -> tuple[ExactMatchingInstance, int]:
    """Exact-matching instance with red set M1 and costs c2 shifted to be nonnegative.

    Returns the instance and the per-edge shift, so that
    ``c2(M) = cost(M) + n * shift`` for every perfect matching ``M``.
    """
    m1 = matching(m1)
    edges = [e for e, (_, b) in inst.costs.items() if b != INF]
    shift = min((inst.c2(e) for e in edges), default=0)
    costs = {e: inst.c2(e) - shift for e in edges}
    g = ExactMatchingInstance(inst.n, inst.n, frozenset(edges), frozenset(e for e in m1 if e in costs),
                              inst.k if r is None else r, costs)
    return g, shift


def solve_2s(inst: Instance, m1: Iterable[Edge], trials: int = 40, seed: int = 0,
             max_n: int = DEFAULT_MAX_N, max_cost: int = DEFAULT_MAX_COST) -> TwoStageResult:
    """Cheapest M2 with ``|M1 ∩ M2| >= k`` by solving exact intersection ``r`` for ``r = k..n``.

    Each round of random weights is shared by all targets still unresolved,
    so every target sees up to ``trials`` independent rounds.
    """
    m1 = matching(m1)
    if len(m1) != inst.n or len({i for i, _ in m1}) != inst.n or len({j for _, j in m1}) != inst.n:
        raise InstanceError("m1 must be a perfect matching")
    g, _ = reduce_2s_to_exact(inst, m1)
    _check_budget(g, max_n, max_cost)
    rng = random.Random(seed)
    pending = list(range(inst.k, inst.n + 1))
    outcomes: dict[int, list] = {r: [] for r in pending}
    found: dict[int, Matching] = {}
    used = 0
    while pending and used < trials:
        used += 1
        res = _isolate(g, pending, rng) if g.balanced else {r: None for r in pending}
        for r in list(pending):
            outcomes[r].append(res[r] is not None)
            if res[r] is not None:
                found[r] = res[r]
                pending.remove(r)
    per = {}
    best = None
    for r, outs in outcomes.items():
        m2 = found.get(r)
        per[r] = ExactMatchingResult(m2, None if m2 is None else g.cost(m2), len(outs), sum(outs),
                                     0.0 if m2 is not None else 2.0 ** -len(outs), outs)
        if m2 is None:
            continue
        cost = inst.cost2(m2)
        # independent re-verification of the returned witness
        if cost == INF or len(m2 & m1) != r or len(m2) != inst.n:
            raise AssertionError("exact-matching engine returned an unverified matching")
        if best is None or cost < best[1]:
            best = (m2, cost)
    if best is None:
        return TwoStageResult(None, INF, used, 2.0 ** -used, per)
    return TwoStageResult(best[0], best[1], used, 2.0 ** -trials, per)


@dataclass(frozen=True)
class Preprocessed:
    """Result of removing forced edges.

    ``left_ids[a]`` is the original index of reduced left vertex ``a + 1``.
    """

    instance: ExactMatchingInstance
    forced: frozenset
    left_ids: tuple
    right_ids: tuple


def preprocess_degree_one(g: ExactMatchingInstance) -> Optional[Preprocessed]:
    """Commit edges at degree-one vertices until none remain; ``None`` if infeasible."""
    if not g.balanced:
        return None
    left = set(range(1, g.nl + 1))
    right = set(range(1, g.nr + 1))
    adj_l = {i: set() for i in left}
    adj_r = {j: set() for j in right}
    for i, j in g.edges:
        adj_l[i].add(j)
        adj_r[j].add(i)
    k = g.k
    forced = set()
    changed = True
    while changed:
        changed = False
        for side, adj, other in (("l", adj_l, adj_r), ("r", adj_r, adj_l)):
            for x in sorted(adj):
                if x not in adj:
                    continue
                if len(adj[x]) == 0:
                    return None
                if len(adj[x]) != 1:
                    continue
                (y,) = adj[x]
                e = (x, y) if side == "l" else (y, x)
                forced.add(e)
                if e in g.red:
                    k -= 1
                    if k < 0:
                        return None
                for z in adj.pop(x):
                    other[z].discard(x)
                for z in other.pop(y):
                    if z != x:
                        adj[z].discard(y)
                changed = True
    if any(not s for s in adj_l.values()) or any(not s for s in adj_r.values()):
        return None
    lids = tuple(sorted(adj_l))
    rids = tuple(sorted(adj_r))
    if k > len(lids):
        return None
    li = {x: a + 1 for a, x in enumerate(lids)}
    ri = {y: b + 1 for b, y in enumerate(rids)}
    edges = {(li[i], ri[j]): (i, j) for i in lids for j in adj_l[i]}
    costs = None if g.costs is None else {e: g.costs[o] for e, o in edges.items()}
    red = frozenset(e for e, o in edges.items() if o in g.red)
    inst = ExactMatchingInstance(len(lids), len(rids), frozenset(edges), red, k, costs)
    return Preprocessed(inst, frozenset(forced), lids, rids)


@dataclass(frozen=True)
class MatchingRedReduction:
    """Output of the red-matching gadget, with vertex bookkeeping for lifting solutions."""

    instance: ExactMatchingInstance
    edge_pair: dict  # original edge -> gadget edge u_e - v_e


def reduce_exact_to_matching_red(g: ExactMatchingInstance) -> MatchingRedReduction:
    """Equivalent instance whose red edges form a matching.

    Every original vertex ``x`` of degree ``d`` becomes an independent set
    of ``d - 1`` copies; every edge ``e = (u, v)`` becomes a path
    ``u-copies - u_e - v_e - v-copies`` where only ``u_e v_e`` can be red.
    The copies of ``x`` absorb all but one of its edge vertices, and the
    remaining one must use its ``u_e v_e`` edge, so the used middle edges
    form a perfect matching of the original graph.
    """
    dl, dr = g.degrees()
    for side, deg in (("left", dl), ("right", dr)):
        for x, d in deg.items():
            if d < 2:
                raise InstanceError(f"{side} vertex {x} has degree {d}; run preprocess_degree_one first")
    edges = sorted(g.edges)
    # left side: copies of original left vertices, then v_e; right side: copies of right vertices, then u_e
    lcopy, rcopy = {}, {}
    nl = nr = 0
    for x in sorted(dl):
        lcopy[x] = list(range(nl + 1, nl + dl[x]))
        nl += dl[x] - 1
    for y in sorted(dr):
        rcopy[y] = list(range(nr + 1, nr + dr[y]))
        nr += dr[y] - 1
    ve, ue = {}, {}
    for e in edges:
        nl += 1
        ve[e] = nl
        nr += 1
        ue[e] = nr
    new_edges, red, costs = set(), set(), {}
    edge_pair = {}
    for e in edges:
        i, j = e
        mid = (ve[e], ue[e])
        new_edges.add(mid)
        edge_pair[e] = mid
        costs[mid] = g.costs[e] if g.costs is not None else 0
        if e in g.red:
            red.add(mid)
        for c in lcopy[i]:
            new_edges.add((c, ue[e]))
            costs[(c, ue[e])] = 0
        for c in rcopy[j]:
            new_edges.add((ve[e], c))
            costs[(ve[e], c)] = 0
    out = ExactMatchingInstance(nl, nr, frozenset(new_edges), frozenset(red), g.k,
                                costs if g.costs is not None else None)
    return MatchingRedReduction(out, edge_pair)


def lift_matching_red(red: MatchingRedReduction, m: Iterable[Edge]) -> Matching:
    """Original perfect matching encoded by a perfect matching of the gadget graph."""
    m = set(m)
    return frozenset(e for e, mid in red.edge_pair.items() if mid in m)


def reduce_exactred_to_2s(g: ExactMatchingInstance) -> tuple[Instance, Matching]:
    """Second-stage instance whose optimum equals ``g.k`` iff ``g`` is a yes-instance.

    Every vertex not covered by the red matching gets a private partner
    joined by an edge that is in M1 and forbidden for M2.  The i-th new
    partner on each side is joined to the i-th on the other by a free edge.
    M2 pays 1 per red edge, so its cost equals its intersection with M1.
    """
    if not g.balanced:
        raise InstanceError("reduction needs a balanced graph")
    rl = {i for i, _ in g.red}
    rr = {j for _, j in g.red}
    if len(rl) != len(g.red) or len(rr) != len(g.red):
        raise InstanceError("red edges must form a matching")
    n0 = g.nl
    free_l = [i for i in range(1, n0 + 1) if i not in rl]
    free_r = [j for j in range(1, n0 + 1) if j not in rr]
    # left primes (partners of free right vertices) sit on the left, and vice versa
    n = n0 + len(free_l)
    costs: dict[Edge, tuple[Cost, Cost]] = {}
    for e in g.edges:
        costs[e] = (0, 1) if e in g.red else (INF, 0)
    m1 = set(g.red)
    for a, i in enumerate(free_l):
        e = (i, n0 + a + 1)  # i -- i'
        costs[e] = (0, INF)
        m1.add(e)
    for a, j in enumerate(free_r):
        e = (n0 + a + 1, j)  # j' -- j
        costs[e] = (0, INF)
        m1.add(e)
    for a in range(len(free_l)):
        costs[(n0 + a + 1, n0 + a + 1)] = (INF, 0)  # j'_a -- i'_a
    return Instance(n, costs, g.k), frozenset(m1)
