"""Minimum-cost perfect matching on (sub)instances of K_{n,n}.

Shortest augmenting paths with vertex potentials, O(n^3).  Missing or INF
entries are treated as absent edges rather than as large finite numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .core import INF, Cost, Edge, Instance, InstanceError, Matching


@dataclass(frozen=True)
class ApProblem:
    left: tuple[int, ...]
    right: tuple[int, ...]
    cost: Mapping[Edge, Cost]

    def __post_init__(self):
        if len(self.left) != len(self.right):
            raise InstanceError("assignment problem must be balanced")

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[Cost]]) -> "ApProblem":
        n = len(matrix)
        cost = {(i + 1, j + 1): matrix[i][j]
                for i in range(n) for j in range(n) if matrix[i][j] != INF}
        return cls(tuple(range(1, n + 1)), tuple(range(1, n + 1)), cost)

    @classmethod
    def from_instance(cls, inst: Instance, weight: Callable[[Cost, Cost], Cost],
                      left: Optional[Iterable[int]] = None,
                      right: Optional[Iterable[int]] = None) -> "ApProblem":
        """Sub-problem of ``inst`` on the given vertices with edge cost ``weight(c1, c2)``."""
        left = tuple(range(1, inst.n + 1)) if left is None else tuple(sorted(left))
        right = tuple(range(1, inst.n + 1)) if right is None else tuple(sorted(right))
        ls, rs = set(left), set(right)
        cost = {}
        for (i, j), (c1, c2) in inst.costs.items():
            if i in ls and j in rs:
                w = weight(c1, c2)
                if w != INF:
                    cost[(i, j)] = w
        return cls(left, right, cost)


def _hungarian(n: int, cost: list[list[Cost]]) -> Optional[list[int]]:
    # 1-based arrays; p[j] = row assigned to column j, 0 = none
    u = [0] * (n + 1)
    v = [0] * (n + 1)
    p = [0] * (n + 1)
    way = [0] * (n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = cost[i0 - 1]
            delta = INF
            j1 = -1
            for j in range(1, n + 1):
                if used[j]:
                    continue
                c = row[j - 1]
                if c != INF:
                    cur = c - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            if delta == INF:
                return None
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    assign = [0] * n
    for j in range(1, n + 1):
        assign[p[j] - 1] = j - 1
    return assign


def solve_ap(p: ApProblem) -> Optional[tuple[Matching, Cost]]:
    """Optimal perfect matching of ``p`` as ``(pairs, cost)``, or ``None`` if none exists.

    The algorithm is deterministic: rows are inserted in the order of
    ``p.left`` and the lowest-index column wins ties in the Dijkstra step.
    """
    n = len(p.left)
    if n == 0:
        return frozenset(), 0
    ri = {x: a for a, x in enumerate(p.left)}
    ci = {y: b for b, y in enumerate(p.right)}
    mat: list[list[Cost]] = [[INF] * n for _ in range(n)]
    for (x, y), c in p.cost.items():
        if c != INF and x in ri and y in ci:
            mat[ri[x]][ci[y]] = c
    assign = _hungarian(n, mat)
    if assign is None:
        return None
    pairs = frozenset((p.left[a], p.right[assign[a]]) for a in range(n))
    return pairs, sum(mat[a][assign[a]] for a in range(n))


def solve_ap_with_forced(p: ApProblem, forced: Iterable[Edge]) -> Optional[tuple[Matching, Cost]]:
    """Optimal perfect matching of ``p`` containing every edge of ``forced``."""
    forced = sorted(set(forced))
    rows = [x for x, _ in forced]
    cols = [y for _, y in forced]
    if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
        raise InstanceError("forced edges must be vertex-disjoint")
    fixed = 0
    for e in forced:
        c = p.cost.get(e, INF)
        if c == INF or e[0] not in p.left or e[1] not in p.right:
            return None
        fixed += c
    rs, cs = set(rows), set(cols)
    sub = ApProblem(tuple(x for x in p.left if x not in rs),
                    tuple(y for y in p.right if y not in cs),
                    {e: c for e, c in p.cost.items() if e[0] not in rs and e[1] not in cs})
    res = solve_ap(sub)
    if res is None:
        return None
    return res[0] | frozenset(forced), res[1] + fixed


def solve_matrix(matrix: Sequence[Sequence[Cost]]) -> Optional[tuple[Matching, Cost]]:
    return solve_ap(ApProblem.from_matrix(matrix))
