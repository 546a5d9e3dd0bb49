"""Exhaustive ground-truth solvers.

Everything here is brute force over perfect matchings and is meant for desk
scale only.  The size guard defaults to ``n <= 10`` and can be raised with the
``RECOVAP_ORACLE_LIMIT`` environment variable or bypassed per call.
"""

from __future__ import annotations

import os
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from .core import (INF, Cost, Edge, ExactMatchingInstance, Instance, Matching, SolutionPair, matching,
                   validate_solution)

DEFAULT_LIMIT = 10


class OracleLimitError(RuntimeError):
    """The requested enumeration exceeds the configured size guard."""


def oracle_limit() -> int:
    raw = os.environ.get("RECOVAP_ORACLE_LIMIT")
    if raw is None:
        return DEFAULT_LIMIT
    try:
        return int(raw)
    except ValueError:
        raise OracleLimitError(f"RECOVAP_ORACLE_LIMIT={raw!r} is not an integer") from None


def _guard(n: int, force: bool) -> None:
    if not force and n > oracle_limit():
        raise OracleLimitError(
            f"oracle refuses n={n} > limit {oracle_limit()} "
            "(set RECOVAP_ORACLE_LIMIT or pass force=True)")


class _Enumerator:
    """Backtracking over perfect matchings of a bipartite graph.

    Vertices ``0..nl-1`` are left, ``nl..nl+nr-1`` right.  Degree-one
    vertices are matched by propagation; otherwise the branch vertex is the
    live vertex of minimum degree (lowest id on ties), and its partners are
    tried in increasing order.  Each branch fixes a different partner, so
    every perfect matching is produced exactly once.  On K_{n,n} this is
    lexicographic order of permutations.
    """

    def __init__(self, nl: int, nr: int, edges: Iterable[Edge]):
        self.nl = nl
        self.nbrs: list[set[int]] = [set() for _ in range(nl + nr)]
        for i, j in edges:
            a, b = i - 1, nl + j - 1
            self.nbrs[a].add(b)
            self.nbrs[b].add(a)
        self.alive = set(range(nl + nr))
        self.pairs: list[tuple[int, int]] = []

    def _match(self, x: int, y: int, log: list, queue: list) -> None:
        for v in (x, y):
            self.alive.discard(v)
            log.append(("v", v))
            for z in list(self.nbrs[v]):
                self.nbrs[v].discard(z)
                self.nbrs[z].discard(v)
                log.append(("e", v, z))
                if z in self.alive and len(self.nbrs[z]) <= 1:
                    queue.append(z)
        self.pairs.append((x, y) if x < y else (y, x))
        log.append(("p",))

    def _undo(self, log: list) -> None:
        while log:
            rec = log.pop()
            if rec[0] == "v":
                self.alive.add(rec[1])
            elif rec[0] == "e":
                _, v, z = rec
                self.nbrs[v].add(z)
                self.nbrs[z].add(v)
            else:
                self.pairs.pop()

    def _propagate(self, queue: list, log: list) -> bool:
        while queue:
            x = queue.pop()
            if x not in self.alive:
                continue
            d = len(self.nbrs[x])
            if d == 0:
                return False
            if d == 1:
                (y,) = self.nbrs[x]
                self._match(x, y, log, queue)
        return True

    def run(self) -> Iterator[Matching]:
        nl = self.nl
        if len(self.alive) == 0:
            yield frozenset()
            return
        if nl * 2 != len(self.nbrs):
            return
        log: list = []
        queue = sorted(v for v in self.alive if len(self.nbrs[v]) <= 1)
        if self._propagate(queue, log):
            yield from self._search(nl)
        self._undo(log)

    def _search(self, nl: int) -> Iterator[Matching]:
        if not self.alive:
            yield frozenset((a + 1, b - nl + 1) for a, b in self.pairs)
            return
        x = min(self.alive, key=lambda v: (len(self.nbrs[v]), v))
        if not self.nbrs[x]:
            return
        for y in sorted(self.nbrs[x]):
            log: list = []
            queue: list = []
            self._match(x, y, log, queue)
            if self._propagate(queue, log):
                yield from self._search(nl)
            self._undo(log)


def enumerate_matchings(nl: int, nr: int, edges: Iterable[Edge], max_count: Optional[int] = None) -> Iterator[Matching]:
    """Yield every perfect matching of the bipartite graph exactly once."""
    count = 0
    for m in _Enumerator(nl, nr, edges).run():
        count += 1
        if max_count is not None and count > max_count:
            raise OracleLimitError(f"more than {max_count} perfect matchings")
        yield m


def enumerate_perfect_matchings(inst: Instance, usable: Optional[Callable[[Cost, Cost], bool]] = None,
                                force: bool = False, max_count: Optional[int] = None) -> Iterator[Matching]:
    """Perfect matchings of ``inst``'s graph, optionally restricted to edges with ``usable(c1, c2)``."""
    _guard(inst.n, force)
    edges = [e for e, (c1, c2) in inst.costs.items() if usable is None or usable(c1, c2)]
    return enumerate_matchings(inst.n, inst.n, edges, max_count)


def _perm_array(ms: list[Matching], n: int) -> np.ndarray:
    out = np.zeros((len(ms), n), dtype=np.int16)
    for a, m in enumerate(ms):
        for i, j in m:
            out[a, i - 1] = j
    return out


def _best_pairs(inst: Instance, ks: Iterable[int], force: bool = False, chunk: int = 256):
    """Best ``(cost, m1, m2)`` over all matching pairs with intersection >= k, for each k in ``ks``."""
    ms1 = list(enumerate_perfect_matchings(inst, lambda a, b: a != INF, force))
    ms2 = list(enumerate_perfect_matchings(inst, lambda a, b: b != INF, force))
    ks = sorted(set(ks))
    best: dict[int, Optional[tuple[Cost, int, int]]] = {k: None for k in ks}
    if not ms1 or not ms2:
        return {k: None for k in ks}
    p1, p2 = _perm_array(ms1, inst.n), _perm_array(ms2, inst.n)
    cost1 = np.array([inst.cost1(m) for m in ms1], dtype=np.int64)
    cost2 = np.array([inst.cost2(m) for m in ms2], dtype=np.int64)
    for start in range(0, len(ms1), chunk):
        blk = p1[start:start + chunk]
        inter = (blk[:, None, :] == p2[None, :, :]).sum(axis=2)
        total = cost1[start:start + chunk, None] + cost2[None, :]
        for k in ks:
            masked = np.where(inter >= k, total, np.iinfo(np.int64).max)
            flat = int(np.argmin(masked))
            a, b = divmod(flat, len(ms2))
            val = masked[a, b]
            if val == np.iinfo(np.int64).max:
                continue
            cur = best[k]
            if cur is None or val < cur[0]:
                best[k] = (int(val), start + a, b)
    return {k: None if v is None else SolutionPair.build(inst.with_k(k), ms1[v[1]], ms2[v[2]])
            for k, v in best.items()}


def brute_force_recovap(inst: Instance, force: bool = False) -> Optional[SolutionPair]:
    """Global optimum over all ordered pairs of perfect matchings, or ``None`` if infeasible."""
    return _best_pairs(inst, [inst.k], force)[inst.k]


def recovap_profile(inst: Instance, force: bool = False) -> dict[int, Optional[SolutionPair]]:
    """Oracle optimum for every k in ``0..n`` from a single enumeration."""
    return _best_pairs(inst, range(inst.n + 1), force)


def brute_force_2s(inst: Instance, m1: Iterable[Edge], force: bool = False) -> Optional[tuple[Matching, Cost]]:
    """Cheapest M2 (under c2) with ``|M1 ∩ M2| >= inst.k``; first in enumeration order on ties."""
    m1 = matching(m1)
    best = None
    for m2 in enumerate_perfect_matchings(inst, lambda a, b: b != INF, force):
        if len(m1 & m2) < inst.k:
            continue
        c = inst.cost2(m2)
        if best is None or c < best[1]:
            best = (m2, c)
    return best


def brute_force_exact_matching(g: ExactMatchingInstance, force: bool = False) -> Optional[Matching]:
    """A perfect matching with exactly ``g.k`` red edges, or ``None``.

    With costs present the cheapest such matching is returned.
    """
    _guard(max(g.nl, g.nr), force)
    if not g.balanced:
        return None
    best = None
    for m in enumerate_matchings(g.nl, g.nr, sorted(g.edges)):
        if len(m & g.red) != g.k:
            continue
        if g.costs is None:
            return m
        if best is None or g.cost(m) < g.cost(best):
            best = m
    return best


def exact_matching_red_counts(g: ExactMatchingInstance, force: bool = False) -> dict[int, int]:
    """Minimum cost (0 without costs) of a perfect matching for each achievable red count."""
    _guard(max(g.nl, g.nr), force)
    out: dict[int, int] = {}
    if not g.balanced:
        return out
    for m in enumerate_matchings(g.nl, g.nr, sorted(g.edges)):
        r = len(m & g.red)
        c = g.cost(m)
        if r not in out or c < out[r]:
            out[r] = c
    return out


def zero_cost_pair(inst: Instance, max_count: int = 200_000) -> Optional[SolutionPair]:
    """A pair of cost 0 with intersection >= k, by exhaustion over zero-cost matchings.

    Only edges with ``c1 == 0`` (resp. ``c2 == 0``) can appear in M1 (resp.
    M2), so for sparse structured instances the enumeration is small even
    when ``n`` is large.  Returns the pair of maximum intersection.
    """
    ms1 = list(enumerate_perfect_matchings(inst, lambda a, b: a == 0, True, max_count))
    ms2 = list(enumerate_perfect_matchings(inst, lambda a, b: b == 0, True, max_count))
    if not ms1 or not ms2:
        return None
    index = {e: a for a, e in enumerate(inst.costs)}
    a1 = np.zeros((len(ms1), len(index)), dtype=np.float32)
    a2 = np.zeros((len(ms2), len(index)), dtype=np.float32)
    for r, m in enumerate(ms1):
        a1[r, [index[e] for e in m]] = 1
    for r, m in enumerate(ms2):
        a2[r, [index[e] for e in m]] = 1
    inter = a1 @ a2.T
    a, b = np.unravel_index(int(np.argmax(inter)), inter.shape)
    if inter[a, b] < inst.k:
        return None
    return SolutionPair.build(inst, ms1[a], ms2[b])


def milp_recovap(inst: Instance, zero_cost_only: bool = False) -> Optional[SolutionPair]:
    """Exact optimum by integer programming (HiGHS via scipy).

    Used as an independent check where enumeration is too large, chiefly the
    gadget instances.  With ``zero_cost_only`` only edges of cost 0 in the
    respective matching are allowed, turning the problem into a feasibility
    question that is easy for the solver even on a few hundred vertices.
    """
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import lil_matrix

    n = inst.n
    e1 = [e for e, (a, _) in inst.costs.items() if a != INF and (not zero_cost_only or a == 0)]
    e2 = [e for e, (_, b) in inst.costs.items() if b != INF and (not zero_cost_only or b == 0)]
    common = sorted(set(e1) & set(e2))
    n1, n2, nc = len(e1), len(e2), len(common)
    nv = n1 + n2 + nc
    idx1 = {e: a for a, e in enumerate(e1)}
    idx2 = {e: n1 + a for a, e in enumerate(e2)}
    cost = np.zeros(nv)
    for e, a in idx1.items():
        cost[a] = inst.c1(e)
    for e, a in idx2.items():
        cost[a] = inst.c2(e)
    rows = 4 * n + 2 * nc + 1
    A = lil_matrix((rows, nv))
    lo = np.zeros(rows)
    hi = np.zeros(rows)
    for (i, j), a in idx1.items():
        A[i - 1, a] = 1
        A[n + j - 1, a] = 1
    for (i, j), a in idx2.items():
        A[2 * n + i - 1, a] = 1
        A[3 * n + j - 1, a] = 1
    lo[:4 * n] = hi[:4 * n] = 1
    r = 4 * n
    for t, e in enumerate(common):
        y = n1 + n2 + t
        A[r, y] = 1
        A[r, idx1[e]] = -1
        A[r + 1, y] = 1
        A[r + 1, idx2[e]] = -1
        lo[r] = lo[r + 1] = -np.inf
        r += 2
    for t in range(nc):
        A[r, n1 + n2 + t] = 1
    lo[r], hi[r] = inst.k, np.inf
    res = milp(cost, constraints=LinearConstraint(A.tocsr(), lo, hi),
               integrality=np.ones(nv), bounds=Bounds(0, 1))
    if res.status != 0 or res.x is None:
        return None
    x = np.round(res.x).astype(int)
    m1 = [e for e, a in idx1.items() if x[a]]
    m2 = [e for e, a in idx2.items() if x[a]]
    sol = SolutionPair.build(inst, m1, m2)
    rep = validate_solution(inst, sol)
    if not rep.feasible:
        raise RuntimeError(f"MILP returned an invalid witness: {rep.violation}")
    return sol


def milp_2s(inst: Instance, m1: Iterable[Edge]) -> Optional[tuple[Matching, Cost]]:
    """Second-stage optimum by integer programming; fixes M1 via forbidding other c1 edges."""
    m1 = matching(m1)
    costs = {}
    for e, (a, b) in inst.costs.items():
        if e in m1:
            costs[e] = (0, b)
        elif b != INF:
            costs[e] = (INF, b)
    res = milp_recovap(Instance(inst.n, costs, inst.k))
    if res is None:
        return None
    return res.m2, inst.cost2(res.m2)
