"""Seeded random instance generators used by the tests, the CLI and the benchmarks."""

from __future__ import annotations

import random
from typing import Optional

from .core import INF, ExactMatchingInstance, Instance, InstanceError, Matching, matching
from .monge import CostMatrixPair, generate_anti_monge, generate_monge


def _check(n: int, density: float):
    if n < 1:
        raise InstanceError("n must be positive")
    if not 0.0 <= density <= 1.0:
        raise InstanceError("density must lie in [0, 1]")


def random_instance(n: int, density: float, seed: int, k: int = 0, lo: int = -5, hi: int = 9,
                    inf_prob: float = 0.1) -> Instance:
    """Each edge is present with probability ``density``; a cost is ``inf`` with ``inf_prob``."""
    _check(n, density)
    rng = random.Random(seed)
    costs = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if rng.random() < density:
                a = rng.randint(lo, hi) if rng.random() > inf_prob else INF
                b = rng.randint(lo, hi) if (rng.random() > inf_prob or a == INF) else INF
                costs[(i, j)] = (a, b)
    return Instance(n, costs, k)


def random_second_stage(n: int, density: float, seed: int, k: Optional[int] = None,
                        lo: int = -5, hi: int = 9) -> tuple[Instance, Matching]:
    """Random instance with a planted first-stage perfect matching M1 of finite c1 cost."""
    _check(n, density)
    rng = random.Random(seed)
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    m1 = matching((i, perm[i - 1]) for i in range(1, n + 1))
    base = random_instance(n, density, rng.randrange(2 ** 32), 0, lo, hi)
    costs = dict(base.costs)
    for e in m1:
        c2 = costs[e][1] if e in costs else rng.randint(lo, hi)
        costs[e] = (rng.randint(lo, hi), c2)
    if k is None:
        k = rng.randint(0, n)
    return Instance(n, costs, k), m1


def random_exact_instance(n: int, density: float, seed: int, red_prob: float = 0.4,
                          with_costs: bool = False, k: Optional[int] = None) -> ExactMatchingInstance:
    _check(n, density)
    rng = random.Random(seed)
    edges = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if rng.random() < density]
    red = [e for e in edges if rng.random() < red_prob]
    if k is None:
        k = rng.randint(0, n)
    costs = {e: rng.randint(0, 6) for e in edges} if with_costs else None
    return ExactMatchingInstance(n, n, frozenset(edges), frozenset(red), k, costs)


def monge_pair(n: int, k: int, seed: int, scale: int = 5) -> CostMatrixPair:
    """Monge ``c1`` and Anti-Monge ``c2`` drawn from independent sub-seeds of ``seed``."""
    rng = random.Random(seed)
    s1, s2 = rng.randrange(2 ** 32), rng.randrange(2 ** 32)
    return CostMatrixPair(generate_monge(n, s1, scale), generate_anti_monge(n, s2, scale), k)
