"""Instances, matchings, solution pairs and alternating-cycle decomposition.

Vertices on the left are u_1..u_n and on the right v_1..v_n.  An edge is the
index pair ``(i, j)`` joining u_i and v_j, always 1-based.  Absent edges play
the role of infinite cost, so "complete bipartite with +inf costs" is
represented by simply omitting the edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Union

INF = math.inf

Cost = Union[int, float]
Edge = tuple[int, int]
Matching = frozenset  # frozenset[Edge]


class InstanceError(ValueError):
    """Raised when an instance, matching or file violates its invariants."""


def is_inf(c: Cost) -> bool:
    return c == INF


def as_cost(c: Cost) -> Cost:
    """Normalize a cost to either an ``int`` or the ``INF`` sentinel."""
    if c == INF:
        return INF
    if isinstance(c, float):
        if not c.is_integer():
            raise InstanceError(f"non-integer cost {c!r}")
        return int(c)
    if isinstance(c, bool) or not isinstance(c, int):
        # numpy integers end up here
        try:
            return int(c)
        except (TypeError, ValueError):
            raise InstanceError(f"cost {c!r} is not an integer") from None
    return c


def matching(pairs: Iterable[Edge]) -> Matching:
    return frozenset((int(i), int(j)) for i, j in pairs)


@dataclass(frozen=True)
class Instance:
    """A RecovAP instance on the bipartite graph with ``n + n`` vertices.

    ``costs`` maps each edge ``(i, j)`` to ``(c1, c2)``.  Either cost may be
    ``INF`` (the edge is then unusable for that matching) but not both.
    """

    n: int
    costs: Mapping[Edge, tuple[Cost, Cost]]
    k: int = 0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise InstanceError(f"n must be a positive integer, got {self.n!r}")
        if not 0 <= self.k <= self.n:
            raise InstanceError(f"k={self.k} outside 0..{self.n}")
        clean = {}
        for (i, j), (c1, c2) in sorted(self.costs.items()):
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise InstanceError(f"edge ({i},{j}) out of range 1..{self.n}")
            c1, c2 = as_cost(c1), as_cost(c2)
            if c1 == INF and c2 == INF:
                raise InstanceError(f"edge ({i},{j}) has both costs inf")
            clean[(int(i), int(j))] = (c1, c2)
        object.__setattr__(self, "costs", MappingProxyType(clean))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, Cost, Cost]], k: int = 0) -> "Instance":
        costs: dict[Edge, tuple[Cost, Cost]] = {}
        for i, j, c1, c2 in edges:
            if (i, j) in costs:
                raise InstanceError(f"duplicate edge ({i},{j})")
            costs[(i, j)] = (c1, c2)
        return cls(n, costs, k)

    @classmethod
    def from_matrices(cls, c1, c2, k: int = 0) -> "Instance":
        """Complete instance from two square matrices (lists or arrays)."""
        n = len(c1)
        costs = {}
        for i in range(n):
            if len(c1[i]) != n or len(c2[i]) != n:
                raise InstanceError("cost matrices must be square and of equal size")
            for j in range(n):
                a, b = as_cost(c1[i][j]), as_cost(c2[i][j])
                if a == INF and b == INF:
                    continue
                costs[(i + 1, j + 1)] = (a, b)
        return cls(n, costs, k)

    def with_k(self, k: int) -> "Instance":
        return Instance(self.n, dict(self.costs), k)

    @property
    def edges(self) -> list[Edge]:
        return list(self.costs)

    @property
    def m(self) -> int:
        return len(self.costs)

    def c1(self, e: Edge) -> Cost:
        return self.costs.get(e, (INF, INF))[0]

    def c2(self, e: Edge) -> Cost:
        return self.costs.get(e, (INF, INF))[1]

    def cost1(self, m: Iterable[Edge]) -> Cost:
        return sum((self.c1(e) for e in m), 0)

    def cost2(self, m: Iterable[Edge]) -> Cost:
        return sum((self.c2(e) for e in m), 0)

    def neighbors(self) -> dict[int, list[int]]:
        """Right neighbours of each left vertex, in increasing order."""
        adj: dict[int, list[int]] = {i: [] for i in range(1, self.n + 1)}
        for i, j in self.costs:
            adj[i].append(j)
        return adj

    def matrix(self, which: int) -> list[list[Cost]]:
        """Dense ``n x n`` matrix of c1 (``which=1``) or c2; INF off the graph."""
        out = [[INF] * self.n for _ in range(self.n)]
        for (i, j), cs in self.costs.items():
            out[i - 1][j - 1] = cs[which - 1]
        return out

    def is_complete(self) -> bool:
        return self.m == self.n * self.n


@dataclass(frozen=True)
class SolutionPair:
    m1: Matching
    m2: Matching
    cost: Cost
    intersection: int

    @classmethod
    def build(cls, inst: Instance, m1: Iterable[Edge], m2: Iterable[Edge]) -> "SolutionPair":
        m1, m2 = matching(m1), matching(m2)
        return cls(m1, m2, inst.cost1(m1) + inst.cost2(m2), len(m1 & m2))


@dataclass(frozen=True)
class ValidationReport:
    feasible: bool
    cost: Cost
    intersection: int
    violation: Optional[str] = None


def _check_matching(inst: Instance, m: Iterable, name: str) -> Optional[str]:
    rows: dict[int, Edge] = {}
    cols: dict[int, Edge] = {}
    try:
        m = list(m)
    except TypeError:
        return f"{name}: not a collection of pairs"
    for pair in m:
        try:
            i, j = pair
        except (TypeError, ValueError):
            return f"{name}: malformed pair {pair!r}"
        if not (isinstance(i, int) and isinstance(j, int)):
            return f"{name}: malformed pair {pair!r}"
        if not (1 <= i <= inst.n and 1 <= j <= inst.n):
            return f"{name}: pair ({i},{j}) out of range 1..{inst.n}"
        if (i, j) not in inst.costs:
            return f"{name}: pair ({i},{j}) is not an edge"
        if i in rows:
            return f"{name}: u_{i} matched twice"
        if j in cols:
            return f"{name}: v_{j} matched twice"
        rows[i] = cols[j] = (i, j)
    for i in range(1, inst.n + 1):
        if i not in rows:
            return f"{name}: u_{i} unmatched"
    for j in range(1, inst.n + 1):
        if j not in cols:
            return f"{name}: v_{j} unmatched"
    return None


def validate_solution(inst: Instance, pair) -> ValidationReport:
    """Recompute cost and intersection of ``pair`` from scratch and check it.

    ``pair`` may be a :class:`SolutionPair` or any ``(m1, m2)`` tuple.  The
    cached fields of a ``SolutionPair`` are ignored apart from a consistency
    check.  Malformed input is reported, never raised.
    """
    if isinstance(pair, SolutionPair):
        m1, m2 = pair.m1, pair.m2
    else:
        try:
            m1, m2 = pair
        except (TypeError, ValueError):
            return ValidationReport(False, INF, 0, "pair must be (m1, m2)")
    for m, name in ((m1, "m1"), (m2, "m2")):
        err = _check_matching(inst, m, name)
        if err is not None:
            return ValidationReport(False, INF, 0, err)
    m1, m2 = matching(m1), matching(m2)
    cost = inst.cost1(m1) + inst.cost2(m2)
    inter = len(m1 & m2)
    for e in sorted(m1):
        if inst.c1(e) == INF:
            return ValidationReport(False, cost, inter, f"m1: c1 infinite on {e}")
    for e in sorted(m2):
        if inst.c2(e) == INF:
            return ValidationReport(False, cost, inter, f"m2: c2 infinite on {e}")
    if inter < inst.k:
        return ValidationReport(False, cost, inter, f"intersection {inter} < k={inst.k}")
    if isinstance(pair, SolutionPair) and (pair.cost != cost or pair.intersection != inter):
        return ValidationReport(False, cost, inter, "cached cost/intersection disagree with recomputation")
    return ValidationReport(True, cost, inter, None)


@dataclass(frozen=True)
class AlternatingCycle:
    """One component of ``M1 ∪ M2``.

    ``edges`` lists the cycle's edges in traversal order starting with the M1
    edge at the smallest row, alternating M1, M2, M1, ...  A 2-cycle is a
    single common edge.
    """

    edges: tuple[Edge, ...]
    kind: str = field(default="long")

    @property
    def length(self) -> int:
        return 2 if self.kind == "two" else len(self.edges)

    @property
    def rows(self) -> frozenset[int]:
        return frozenset(i for i, _ in self.edges)

    @property
    def cols(self) -> frozenset[int]:
        return frozenset(j for _, j in self.edges)


def _as_perm(m: Iterable[Edge], n: int, name: str) -> dict[int, int]:
    perm = {}
    for i, j in m:
        if i in perm or not (1 <= i <= n and 1 <= j <= n):
            raise InstanceError(f"{name} is not a perfect matching on {n}+{n} vertices")
        perm[i] = j
    if len(perm) != n or set(perm.values()) != set(range(1, n + 1)):
        raise InstanceError(f"{name} is not a perfect matching on {n}+{n} vertices")
    return perm


def cycle_decomposition(m1: Iterable[Edge], m2: Iterable[Edge], n: Optional[int] = None) -> list[AlternatingCycle]:
    m1, m2 = matching(m1), matching(m2)
    if n is None:
        n = len(m1)
    p1 = _as_perm(m1, n, "m1")
    p2 = _as_perm(m2, n, "m2")
    row_of_col2 = {j: i for i, j in p2.items()}
    seen: set[int] = set()
    cycles = []
    for start in range(1, n + 1):
        if start in seen:
            continue
        if p1[start] == p2[start]:
            seen.add(start)
            cycles.append(AlternatingCycle(((start, p1[start]),), "two"))
            continue
        edges = []
        i = start
        while i not in seen:
            seen.add(i)
            j = p1[i]
            edges.append((i, j))
            i2 = row_of_col2[j]
            edges.append((i2, j))
            i = i2
        cycles.append(AlternatingCycle(tuple(edges), "long"))
    return cycles


@dataclass(frozen=True)
class IntervalUncertainty:
    """Interval-uncertainty recoverable robust assignment data.

    Second-stage costs lie in ``[base(e), base(e) + deviation(e)]``; at most
    ``recoverability`` edges of the first-stage matching may be replaced.
    """

    n: int
    first_stage: Mapping[Edge, Cost]
    base: Mapping[Edge, int]
    deviation: Mapping[Edge, int]
    recoverability: int

    def __post_init__(self):
        if set(self.base) != set(self.deviation) or set(self.base) != set(self.first_stage):
            raise InstanceError("first_stage, base and deviation must share one edge set")
        for e, d in self.deviation.items():
            if d < 0:
                raise InstanceError(f"negative deviation {d} on {e}")
        if not 0 <= self.recoverability <= self.n:
            raise InstanceError(f"recoverability {self.recoverability} outside 0..{self.n}")


def worst_case_instance(u: IntervalUncertainty) -> Instance:
    costs = {e: (u.first_stage[e], u.base[e] + u.deviation[e]) for e in u.base}
    return Instance(u.n, costs, u.n - u.recoverability)


@dataclass(frozen=True)
class ExactMatchingInstance:
    """Red-blue bipartite graph asking for a perfect matching with exactly ``k`` red edges.

    Left vertices are ``1..nl`` and right vertices ``1..nr``.  ``costs`` is
    optional; when present it maps every edge to a nonnegative integer.
    """

    nl: int
    nr: int
    edges: frozenset
    red: frozenset
    k: int
    costs: Optional[Mapping[Edge, int]] = None

    def __post_init__(self):
        edges = frozenset((int(i), int(j)) for i, j in self.edges)
        red = frozenset((int(i), int(j)) for i, j in self.red)
        for i, j in edges:
            if not (1 <= i <= self.nl and 1 <= j <= self.nr):
                raise InstanceError(f"edge ({i},{j}) out of range")
        if not red <= edges:
            raise InstanceError("red edges must be edges of the graph")
        if not 0 <= self.k <= self.nl:
            raise InstanceError(f"k={self.k} outside 0..{self.nl}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "red", red)
        if self.costs is not None:
            costs = {}
            for e in edges:
                if e not in self.costs:
                    raise InstanceError(f"edge {e} has no cost")
                c = as_cost(self.costs[e])
                if c == INF or c < 0:
                    raise InstanceError(f"edge {e} cost must be a nonnegative integer")
                costs[e] = c
            object.__setattr__(self, "costs", MappingProxyType(costs))

    @property
    def balanced(self) -> bool:
        return self.nl == self.nr

    def cost(self, m: Iterable[Edge]) -> int:
        if self.costs is None:
            return 0
        return sum(self.costs[e] for e in m)

    def degrees(self) -> tuple[dict[int, int], dict[int, int]]:
        dl = {i: 0 for i in range(1, self.nl + 1)}
        dr = {j: 0 for j in range(1, self.nr + 1)}
        for i, j in self.edges:
            dl[i] += 1
            dr[j] += 1
        return dl, dr

    def is_perfect_matching(self, m: Iterable[Edge]) -> bool:
        m = list(m)
        if self.nl != self.nr or len(m) != self.nl:
            return False
        if any(e not in self.edges for e in m):
            return False
        return len({i for i, _ in m}) == self.nl and len({j for _, j in m}) == self.nr
