"""Enumeration algorithms polynomial for fixed k or fixed k' = n - k.

``xp_solve_k`` guesses the intersection.  Sets of exactly ``k`` common
edges suffice: if an optimal pair shares more than ``k`` edges, any ``k`` of
them form a set S, and forcing S into both matchings still admits that pair
as a completion, so the forced optimum for S is no worse.  Conversely every
forced completion is feasible.  Hence the minimum over all S of size ``k``
is the optimum.

``xp_solve_kprime`` guesses the symmetric difference.  ``D1 = M1 - M2`` and
``D2 = M2 - M1`` cover the same vertex sets and have equal size
``d <= n - k``.  Given D1, the best D2 is an assignment on those vertices
avoiding D1's edges, and the remainder is a common matching optimised
under ``c1 + c2``.
"""

from __future__ import annotations

from itertools import combinations
from typing import Optional

from .assignment import ApProblem, solve_ap
from .core import INF, Edge, Instance, SolutionPair
from .oracle import enumerate_matchings


def xp_solve_k(inst: Instance, max_candidates: Optional[int] = 2_000_000) -> Optional[SolutionPair]:
    n, k = inst.n, inst.k
    both = sorted(e for e, (a, b) in inst.costs.items() if a != INF and b != INF)
    by_row: dict[int, list[Edge]] = {}
    for e in both:
        by_row.setdefault(e[0], []).append(e)
    cache: dict[tuple, Optional[tuple]] = {}

    def residual(rows: frozenset, cols: frozenset):
        key = (rows, cols)
        if key not in cache:
            left = [i for i in range(1, n + 1) if i not in rows]
            right = [j for j in range(1, n + 1) if j not in cols]
            r1 = solve_ap(ApProblem.from_instance(inst, lambda a, b: a, left, right))
            r2 = solve_ap(ApProblem.from_instance(inst, lambda a, b: b, left, right)) if r1 else None
            cache[key] = None if r2 is None else (r1[1] + r2[1], r1[0], r2[0])
        return cache[key]

    best = None
    count = 0

    def rec(start_row: int, chosen: list[Edge], used_cols: frozenset, fixed: int):
        nonlocal best, count
        if len(chosen) == k:
            count += 1
            if max_candidates is not None and count > max_candidates:
                raise RuntimeError(f"xp_solve_k: more than {max_candidates} candidate sets")
            res = residual(frozenset(i for i, _ in chosen), used_cols)
            if res is None:
                return
            total = fixed + res[0]
            if best is None or total < best[0]:
                best = (total, list(chosen), res[1], res[2])
            return
        need = k - len(chosen)
        for i in range(start_row, n - need + 2):
            for e in by_row.get(i, ()):
                if e[1] in used_cols:
                    continue
                chosen.append(e)
                rec(i + 1, chosen, used_cols | {e[1]}, fixed + inst.c1(e) + inst.c2(e))
                chosen.pop()

    rec(1, [], frozenset(), 0)
    if best is None:
        return None
    _, s, r1, r2 = best
    return SolutionPair.build(inst, list(s) + list(r1), list(s) + list(r2))


def xp_solve_kprime(inst: Instance, strict: bool = False,
                    max_candidates: Optional[int] = 2_000_000) -> Optional[SolutionPair]:
    """Optimum by guessing the vertex sets ``(L, R)`` spanned by the symmetric difference.

    By default D1 and D2 are the independent c1- and c2-optimal assignments
    on ``L x R``.  They may share edges, which only raises the intersection,
    so every candidate is feasible and the optimum is among them; only
    ``d = n - k`` needs to be tried since common edges can be absorbed into
    ``L x R``.  ``strict=True`` instead enumerates every D1 and pairs it with
    the best edge-disjoint D2, for every ``d <= n - k``.
    """
    n = inst.n
    kp = n - inst.k
    cache: dict[tuple, Optional[tuple]] = {}

    def ap(lset, rset, weight):
        key = (lset, rset, weight)
        if key not in cache:
            cache[key] = solve_ap(ApProblem.from_instance(inst, _WEIGHTS[weight], lset, rset))
        return cache[key]

    e1 = [e for e, (a, _) in inst.costs.items() if a != INF]
    best = None
    count = 0
    full = tuple(range(1, n + 1))
    for d in (range(0, kp + 1) if strict else (kp,)):
        if strict and d == 1:
            continue  # a single differing edge cannot close a cycle
        for lset in combinations(full, d):
            ls = set(lset)
            lrest = tuple(i for i in full if i not in ls)
            for rset in combinations(full, d):
                rs = set(rset)
                rem = ap(lrest, tuple(j for j in full if j not in rs), "sum")
                if rem is None:
                    continue
                if not strict:
                    r1 = ap(lset, rset, "c1")
                    r2 = ap(lset, rset, "c2") if r1 is not None else None
                    if r2 is None:
                        continue
                    total = r1[1] + r2[1] + rem[1]
                    if best is None or total < best[0]:
                        best = (total, r1[0], r2[0], rem[0])
                    continue
                sub = [e for e in e1 if e[0] in ls and e[1] in rs]
                for d1 in enumerate_matchings_on(lset, rset, sub):
                    count += 1
                    if max_candidates is not None and count > max_candidates:
                        raise RuntimeError(f"xp_solve_kprime: more than {max_candidates} candidates")
                    p2 = ApProblem(lset, rset, {e: inst.c2(e) for e in inst.costs
                                                if e[0] in ls and e[1] in rs and e not in d1
                                                and inst.c2(e) != INF})
                    r2 = solve_ap(p2)
                    if r2 is None:
                        continue
                    total = inst.cost1(d1) + r2[1] + rem[1]
                    if best is None or total < best[0]:
                        best = (total, d1, r2[0], rem[0])
    if best is None:
        return None
    _, d1, d2, c = best
    return SolutionPair.build(inst, list(d1) + list(c), list(d2) + list(c))


_WEIGHTS = {
    "c1": lambda a, b: a,
    "c2": lambda a, b: b,
    "sum": lambda a, b: a + b,
}


def enumerate_matchings_on(lset, rset, edges):
    """Perfect matchings of the subgraph on ``lset x rset`` using ``edges`` (original indices)."""
    li = {x: a + 1 for a, x in enumerate(lset)}
    ri = {y: b + 1 for b, y in enumerate(rset)}
    back_l = {v: k for k, v in li.items()}
    back_r = {v: k for k, v in ri.items()}
    local = [(li[i], ri[j]) for i, j in edges]
    for m in enumerate_matchings(len(lset), len(rset), local):
        yield frozenset((back_l[i], back_r[j]) for i, j in m)
