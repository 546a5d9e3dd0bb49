import itertools
import random

import pytest

from recovap.core import ExactMatchingInstance, Instance, InstanceError
from recovap.generators import random_exact_instance, random_second_stage
from recovap.oracle import brute_force_2s, brute_force_exact_matching, enumerate_matchings, milp_2s
from recovap.second_stage import (BudgetError, bareiss_det, interpolate, lift_matching_red, mvv_exact_matching,
                                  preprocess_degree_one, red_polynomial, reduce_exact_to_matching_red,
                                  reduce_exactred_to_2s, solve_2s)

K22 = frozenset((i, j) for i in (1, 2) for j in (1, 2))
DIAG3 = [(1, 1), (2, 2), (3, 3)]
ANTI = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]


def leibniz(mat):
    n = len(mat)
    total = 0
    for p in itertools.permutations(range(n)):
        sign = (-1) ** sum(1 for a in range(n) for b in range(a + 1, n) if p[a] > p[b])
        prod = 1
        for i in range(n):
            prod *= mat[i][p[i]]
        total += sign * prod
    return total


@pytest.mark.parametrize("seed", range(20))
def test_bareiss_matches_leibniz(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 5)
    mat = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
    assert bareiss_det(mat) == leibniz(mat)


def test_interpolate_recovers_polynomial():
    coeffs = [3, -2, 0, 7]
    vals = [sum(c * y ** r for r, c in enumerate(coeffs)) for y in range(4)]
    assert interpolate(vals) == coeffs


@pytest.mark.parametrize("seed", range(15))
def test_red_polynomial_identity(seed):
    # signed sum of 2^w over perfect matchings, grouped by red count
    rng = random.Random(seed)
    n = rng.randint(1, 4)
    entries = {(i, j): (rng.randint(0, 6), rng.random() < 0.4)
               for i in range(1, n + 1) for j in range(1, n + 1) if rng.random() < 0.8}
    want = [0] * (n + 1)
    for m in enumerate_matchings(n, n, sorted(entries)):
        perm = [j for _, j in sorted(m)]
        sign = (-1) ** sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        want[sum(entries[e][1] for e in m)] += sign * 2 ** sum(entries[e][0] for e in m)
    got = list(red_polynomial(n, entries).coefficients)
    got += [0] * (n + 1 - len(got))
    assert got == want


def test_mvv_examples():
    res = mvv_exact_matching(ExactMatchingInstance(2, 2, K22, frozenset({(1, 1)}), 1), seed=1)
    assert res.matching == {(1, 1), (2, 2)}
    none = mvv_exact_matching(ExactMatchingInstance(2, 2, K22, frozenset({(1, 1), (2, 2)}), 1), trials=10)
    assert none.matching is None and none.error_bound == 2.0 ** -10


@pytest.mark.parametrize("seed", range(40))
def test_mvv_matches_oracle(seed):
    g = random_exact_instance(random.Random(seed).randint(1, 5), 0.7, seed, with_costs=seed % 2 == 0)
    want = brute_force_exact_matching(g)
    got = mvv_exact_matching(g, trials=40, seed=seed)
    assert (want is None) == (got.matching is None)
    if want is not None:
        assert g.is_perfect_matching(got.matching) and len(got.matching & g.red) == g.k
        if g.costs is not None:
            assert got.cost == g.cost(want)


def test_budget_guard():
    g = random_exact_instance(5, 0.7, 0)
    with pytest.raises(BudgetError):
        mvv_exact_matching(g, max_n=4)


def test_solve_2s_examples():
    inst = Instance.from_matrices([[0] * 3] * 3, ANTI, 2)
    res = solve_2s(inst, DIAG3, seed=3)
    assert res.matching == frozenset(DIAG3) and res.cost == 2
    full = solve_2s(inst.with_k(3), DIAG3)
    assert full.matching == frozenset(DIAG3) and full.cost == 2
    assert solve_2s(inst.with_k(1), DIAG3).cost == 0


def test_solve_2s_rejects_bad_m1():
    inst = Instance.from_matrices([[0] * 3] * 3, ANTI, 2)
    with pytest.raises(InstanceError):
        solve_2s(inst, [(1, 1), (2, 1), (3, 3)])


@pytest.mark.parametrize("seed", range(40))
def test_solve_2s_matches_oracle(seed):
    rng = random.Random(seed)
    inst, m1 = random_second_stage(rng.randint(1, 5), rng.choice([0.4, 0.7, 1.0]), seed)
    want = brute_force_2s(inst, m1)
    got = solve_2s(inst, m1, seed=seed)
    assert (want is None) == (got.matching is None)
    if want is not None:
        assert got.cost == want[1] and len(got.matching & m1) >= inst.k


def test_preprocess_path_consumed():
    g = ExactMatchingInstance(3, 3, frozenset({(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)}), frozenset({(2, 2)}), 1)
    pre = preprocess_degree_one(g)
    assert pre.instance.nl == 0 and pre.forced == {(1, 1), (2, 2), (3, 3)} and pre.instance.k == 0


def test_preprocess_red_commit_decrements_k():
    edges = frozenset({(1, 1)} | {(i, j) for i in (2, 3) for j in (2, 3)})
    g = ExactMatchingInstance(3, 3, edges, frozenset({(1, 1), (2, 2)}), 2)
    pre = preprocess_degree_one(g)
    assert pre.instance.k == 1 and pre.instance.nl == 2


def test_preprocess_isolated_vertex():
    g = ExactMatchingInstance(2, 2, frozenset({(1, 1), (2, 1)}), frozenset(), 0)
    assert preprocess_degree_one(g) is None


def test_reduction_needs_min_degree_two():
    g = ExactMatchingInstance(2, 2, frozenset({(1, 1), (2, 1), (2, 2)}), frozenset(), 0)
    with pytest.raises(InstanceError):
        reduce_exact_to_matching_red(g)


def test_gadget_vertex_counts():
    g = random_exact_instance(4, 1.0, 2)
    red = reduce_exact_to_matching_red(g)
    dl, dr = g.degrees()
    m = len(g.edges)
    assert red.instance.nl == sum(d - 1 for d in dl.values()) + m
    assert red.instance.nr == sum(d - 1 for d in dr.values()) + m
    # red edges of the gadget graph form a matching
    assert len({i for i, _ in red.instance.red}) == len(red.instance.red) == len(g.red)


def cycle8(red_edges, k):
    # C8 as a 4+4 bipartite cycle u1 v1 u2 v2 u3 v3 u4 v4
    edges = frozenset({(1, 1), (2, 1), (2, 2), (3, 2), (3, 3), (4, 3), (4, 4), (1, 4)})
    return ExactMatchingInstance(4, 4, edges, frozenset(red_edges), k)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_c8_adjacent_red(k):
    g = cycle8({(1, 1), (2, 1)}, k)
    red = reduce_exact_to_matching_red(g)
    src = brute_force_exact_matching(g)
    dst = brute_force_exact_matching(red.instance, force=True)
    assert (src is None) == (dst is None)
    if dst is not None:
        lifted = lift_matching_red(red, dst)
        assert g.is_perfect_matching(lifted) and len(lifted & g.red) == k


@pytest.mark.parametrize("seed", range(30))
def test_matching_red_round_trip(seed):
    g = random_exact_instance(3 + seed % 2, 0.6, seed)
    pre = preprocess_degree_one(g)
    if pre is None or pre.instance.nl == 0:
        return
    red = reduce_exact_to_matching_red(pre.instance)
    a = brute_force_exact_matching(pre.instance)
    b = brute_force_exact_matching(red.instance, force=True)
    assert (a is None) == (b is None)


def test_exactred_to_2s_examples():
    inst, m1 = reduce_exactred_to_2s(ExactMatchingInstance(2, 2, K22, frozenset({(1, 1)}), 1))
    assert brute_force_2s(inst, m1)[1] == 1
    inst, m1 = reduce_exactred_to_2s(ExactMatchingInstance(2, 2, K22, frozenset({(1, 1), (2, 2)}), 1))
    res = brute_force_2s(inst, m1)
    assert res is None or res[1] != 1


def test_exactred_prime_pairing():
    inst, m1 = reduce_exactred_to_2s(ExactMatchingInstance(2, 2, K22, frozenset({(1, 1)}), 1))
    # free left vertex 2 pairs with prime 3 on the right, free right vertex 2 with prime 3 on the left
    assert inst.n == 3 and (2, 3) in m1 and (3, 2) in m1 and (1, 1) in m1
    assert inst.c2((2, 3)) == inst.c2((3, 2)) == float("inf") and inst.c2((3, 3)) == 0


def test_exactred_rejects_non_matching_red():
    with pytest.raises(InstanceError):
        reduce_exactred_to_2s(ExactMatchingInstance(2, 2, K22, frozenset({(1, 1), (1, 2)}), 1))


@pytest.mark.parametrize("seed", range(30))
def test_exactred_chain(seed):
    g = random_exact_instance(3, 0.9, seed)
    pre = preprocess_degree_one(g)
    if pre is None or pre.instance.nl == 0:
        return
    red = reduce_exact_to_matching_red(pre.instance)
    inst, m1 = reduce_exactred_to_2s(red.instance)
    res = milp_2s(inst, m1)
    yes = brute_force_exact_matching(pre.instance) is not None
    assert yes == (res is not None and res[1] == inst.k)
