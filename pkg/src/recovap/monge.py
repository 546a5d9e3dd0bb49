"""RecovAP when c1 is Monge and c2 is Anti-Monge.

For such costs some optimal pair consists of ``h = (n - k) // 2`` nested
aligned 4-cycles on the outer indices and a common inner block on the
central interval.  M1 uses the main diagonal and M2 the anti-diagonal on
each outer index pair ``(i, n+1-i)``; the inner block is a minimum
assignment under ``a + b`` taken into both matchings.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .assignment import solve_matrix
from .core import Instance, InstanceError, Matching, SolutionPair, cycle_decomposition, matching


class PreconditionError(InstanceError):
    """The cost matrices violate the Monge / Anti-Monge precondition.

    ``quadruple`` holds the offending ``(i, i+1, j, j+1)`` indices (1-based).
    """

    def __init__(self, msg: str, quadruple: Optional[tuple[int, int, int, int]] = None):
        super().__init__(msg)
        self.quadruple = quadruple


def _square(m: Sequence[Sequence[int]]) -> int:
    n = len(m)
    if any(len(row) != n for row in m):
        raise InstanceError("matrix is not square")
    return n


def monge_violation(m: Sequence[Sequence[int]], anti: bool = False) -> Optional[tuple[int, int, int, int]]:
    """First adjacent quadruple breaking the (Anti-)Monge inequality, or ``None``."""
    n = _square(m)
    for i in range(n - 1):
        for j in range(n - 1):
            d = m[i][j] + m[i + 1][j + 1] - m[i][j + 1] - m[i + 1][j]
            if (d < 0) if anti else (d > 0):
                return (i + 1, i + 2, j + 1, j + 2)
    return None


def is_monge(m: Sequence[Sequence[int]]) -> bool:
    return monge_violation(m) is None


def is_anti_monge(m: Sequence[Sequence[int]]) -> bool:
    return monge_violation(m, anti=True) is None


def is_monge_full(m: Sequence[Sequence[int]], anti: bool = False) -> bool:
    """All-quadruple O(n^4) check, kept as a reference for the adjacent test."""
    n = _square(m)
    for i in range(n):
        for k in range(i + 1, n):
            for j in range(n):
                for l in range(j + 1, n):
                    d = m[i][j] + m[k][l] - m[i][l] - m[k][j]
                    if (d < 0) if anti else (d > 0):
                        return False
    return True


def _prefix(d: list[list[int]]) -> list[list[int]]:
    n = len(d)
    p = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            p[i][j] = d[i][j] + (p[i - 1][j] if i else 0) + (p[i][j - 1] if j else 0) \
                - (p[i - 1][j - 1] if i and j else 0)
    return p


def monge_from_density(d: list[list[int]], u: Sequence[int], v: Sequence[int], anti: bool = False) -> list[list[int]]:
    """``u_i + v_j - P[i][j]`` with ``P`` the 2-D prefix sum of ``d >= 0``; negated P for Anti-Monge."""
    p = _prefix(d)
    s = 1 if anti else -1
    n = len(d)
    return [[u[i] + v[j] + s * p[i][j] for j in range(n)] for i in range(n)]


def _random_parts(n: int, seed: int, scale: int):
    rng = random.Random(seed)
    d = [[rng.randint(0, scale) for _ in range(n)] for _ in range(n)]
    u = [rng.randint(-scale * n, scale * n) for _ in range(n)]
    v = [rng.randint(-scale * n, scale * n) for _ in range(n)]
    return d, u, v


def generate_monge(n: int, seed: int, scale: int = 5) -> list[list[int]]:
    if n < 1:
        raise InstanceError("n must be positive")
    return monge_from_density(*_random_parts(n, seed, scale))


def generate_anti_monge(n: int, seed: int, scale: int = 5) -> list[list[int]]:
    if n < 1:
        raise InstanceError("n must be positive")
    return monge_from_density(*_random_parts(n, seed, scale), anti=True)


@dataclass(frozen=True)
class CostMatrixPair:
    a: tuple[tuple[int, ...], ...]
    b: tuple[tuple[int, ...], ...]
    k: int

    def __post_init__(self):
        a = tuple(tuple(int(x) for x in row) for row in self.a)
        b = tuple(tuple(int(x) for x in row) for row in self.b)
        n = _square(a)
        if _square(b) != n or n < 1:
            raise InstanceError("a and b must be square matrices of equal size")
        if not 0 <= self.k <= n:
            raise InstanceError(f"k={self.k} outside 0..{n}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return len(self.a)

    def instance(self) -> Instance:
        return Instance.from_matrices(self.a, self.b, self.k)

    @classmethod
    def from_instance(cls, inst: Instance) -> "CostMatrixPair":
        if not inst.is_complete():
            raise PreconditionError("Monge solver needs a complete instance with finite costs")
        a, b = inst.matrix(1), inst.matrix(2)
        if any(x == float("inf") for row in a + b for x in row):
            raise PreconditionError("Monge solver needs finite costs")
        return cls(a, b, inst.k)


@dataclass(frozen=True)
class NestedSolutionShape:
    outer_cycles: tuple[tuple[int, int, int, int], ...]
    inner_range: tuple[int, int]  # inclusive, empty when lo > hi
    inner_matching: Matching


def nested_shape(n: int, k: int) -> tuple[int, int, int]:
    """``(h, lo, hi)``: number of outer cycles and the inclusive inner interval."""
    h = (n - k) // 2
    return h, h + 1, n - h


def solve_monge_antimonge(p: CostMatrixPair) -> tuple[SolutionPair, NestedSolutionShape]:
    """Optimal pair for Monge ``a`` and Anti-Monge ``b``.

    Raises :class:`PreconditionError` carrying the first violating quadruple
    when either matrix fails its check.
    """
    for mat, anti, name in ((p.a, False, "c1 is not Monge"), (p.b, True, "c2 is not Anti-Monge")):
        q = monge_violation(mat, anti)
        if q is not None:
            raise PreconditionError(f"{name}: rows {q[0]},{q[1]} cols {q[2]},{q[3]}", q)
    n = p.n
    h, lo, hi = nested_shape(n, p.k)
    m1, m2, outer = [], [], []
    for i in range(1, h + 1):
        o = n + 1 - i
        m1 += [(i, i), (o, o)]
        m2 += [(i, o), (o, i)]
        outer.append((i, i, o, o))
    idx = range(lo - 1, hi)
    res = solve_matrix([[p.a[r][c] + p.b[r][c] for c in idx] for r in idx])
    assert res is not None  # dense finite matrix
    inner = matching((lo + r - 1, lo + c - 1) for r, c in res[0])
    m1 += inner
    m2 += inner
    inst = p.instance()
    return SolutionPair.build(inst, m1, m2), NestedSolutionShape(tuple(outer), (lo, hi), inner)


def check_nested_structure(m1, m2, n: int) -> Optional[str]:
    """Describe the first departure from the nested-cycle structure, or ``None``.

    Accepts only 2-cycles and aligned 4-cycles, requires the 4-cycles to be
    mutually nested and every 2-cycle to lie inside the innermost 4-cycle.
    """
    rects = []
    twos = []
    for cyc in cycle_decomposition(m1, m2, n):
        if cyc.kind == "two":
            twos.append(cyc.edges[0])
            continue
        if cyc.length != 4:
            return f"cycle of length {cyc.length}"
        rows, cols = sorted(cyc.rows), sorted(cyc.cols)
        # aligned: M1 pairs the small row with the small column
        m1_edges = {cyc.edges[0], cyc.edges[2]}
        if m1_edges != {(rows[0], cols[0]), (rows[1], cols[1])}:
            return f"4-cycle on rows {rows} cols {cols} is not aligned"
        rects.append((rows[0], rows[1], cols[0], cols[1]))
    rects.sort()
    for a, b in zip(rects, rects[1:]):
        if not (a[0] < b[0] and b[1] < a[1] and a[2] < b[2] and b[3] < a[3]):
            return f"4-cycles {a} and {b} are not nested"
    if rects:
        r0, r1, c0, c1 = rects[-1]
        for i, j in twos:
            if not (r0 < i < r1 and c0 < j < c1):
                return f"2-cycle {(i, j)} outside the innermost 4-cycle"
    return None
