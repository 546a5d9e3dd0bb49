import math

import pytest

from recovap.assignment import ApProblem, solve_ap
from recovap.core import INF, ExactMatchingInstance, Instance, validate_solution
from recovap.generators import random_exact_instance, random_instance, random_second_stage
from recovap.oracle import (OracleLimitError, brute_force_2s, brute_force_exact_matching, brute_force_recovap,
                            enumerate_perfect_matchings, exact_matching_red_counts, milp_2s, milp_recovap,
                            recovap_profile, zero_cost_pair)

C1 = [[0, 5], [5, 0]]
C2 = [[5, 0], [0, 5]]


def full(n, k=0):
    return Instance.from_matrices([[0] * n for _ in range(n)], [[0] * n for _ in range(n)], k)


@pytest.mark.parametrize("n", range(1, 7))
def test_complete_graph_count(n):
    assert sum(1 for _ in enumerate_perfect_matchings(full(n))) == math.factorial(n)


def test_matchings_are_distinct_and_perfect():
    inst = random_instance(6, 0.7, 3)
    ms = list(enumerate_perfect_matchings(inst))
    assert len(ms) == len(set(ms))
    for m in ms:
        assert len(m) == 6 and len({j for _, j in m}) == 6


def test_path_has_one_matching():
    inst = Instance.from_edges(2, [(1, 1, 0, 0), (2, 1, 0, 0), (2, 2, 0, 0)])
    assert list(enumerate_perfect_matchings(inst)) == [frozenset({(1, 1), (2, 2)})]


def test_guard_refuses_large_instances(monkeypatch):
    monkeypatch.setenv("RECOVAP_ORACLE_LIMIT", "3")
    with pytest.raises(OracleLimitError):
        list(enumerate_perfect_matchings(full(4)))
    assert sum(1 for _ in enumerate_perfect_matchings(full(4), force=True)) == 24


def test_recovap_examples():
    assert brute_force_recovap(Instance.from_matrices(C1, C2, 0)).cost == 0
    assert brute_force_recovap(Instance.from_matrices(C1, C2, 1)).cost == 10
    assert brute_force_recovap(Instance(1, {}, 0)) is None


@pytest.mark.parametrize("seed", range(15))
def test_k0_is_two_assignments(seed):
    inst = random_instance(5, 0.7, seed)
    sol = brute_force_recovap(inst)
    a = solve_ap(ApProblem.from_instance(inst, lambda x, y: x))
    b = solve_ap(ApProblem.from_instance(inst, lambda x, y: y))
    if a is None or b is None:
        assert sol is None
    else:
        assert sol.cost == a[1] + b[1]


@pytest.mark.parametrize("seed", range(15))
def test_monotone_in_k(seed):
    inst = random_instance(5, 0.8, seed)
    prof = recovap_profile(inst)
    costs = [INF if prof[k] is None else prof[k].cost for k in range(6)]
    assert costs == sorted(costs)
    for k, sol in prof.items():
        if sol is not None:
            assert validate_solution(inst.with_k(k), sol).feasible


def test_2s_examples():
    inst = Instance.from_matrices([[1, 2, 3], [4, 5, 6], [7, 8, 9]], [[3, 1, 2], [1, 0, 4], [2, 2, 2]], 3)
    diag = [(1, 1), (2, 2), (3, 3)]
    m2, cost = brute_force_2s(inst, diag)
    assert m2 == frozenset(diag) and cost == 3 + 0 + 2
    free = brute_force_2s(inst.with_k(0), diag)
    assert free[1] == solve_ap(ApProblem.from_instance(inst, lambda x, y: y))[1]
    anti = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]
    inst2 = Instance.from_matrices([[0] * 3] * 3, anti, 1)
    assert brute_force_2s(inst2, diag)[1] == 0


def test_exact_examples():
    e = frozenset((i, j) for i in (1, 2) for j in (1, 2))
    assert brute_force_exact_matching(ExactMatchingInstance(2, 2, e, {(1, 1)}, 1)) == {(1, 1), (2, 2)}
    assert brute_force_exact_matching(ExactMatchingInstance(2, 2, e, {(1, 1), (2, 2)}, 1)) is None
    assert brute_force_exact_matching(ExactMatchingInstance(2, 2, e, frozenset(), 0)) is not None


@pytest.mark.parametrize("seed", range(20))
def test_exact_counts_consistent(seed):
    g = random_exact_instance(5, 0.7, seed)
    counts = exact_matching_red_counts(g)
    m = brute_force_exact_matching(g)
    assert (m is None) == (g.k not in counts)
    if m is not None:
        assert g.is_perfect_matching(m) and len(m & g.red) == g.k


@pytest.mark.parametrize("seed", range(25))
def test_milp_agrees_with_enumeration(seed):
    inst = random_instance(5, 0.7, seed, k=seed % 6)
    a, b = brute_force_recovap(inst), milp_recovap(inst)
    assert (a is None) == (b is None)
    if a is not None:
        assert a.cost == b.cost and validate_solution(inst, b).feasible


@pytest.mark.parametrize("seed", range(25))
def test_milp_2s_agrees_with_enumeration(seed):
    inst, m1 = random_second_stage(5, 0.6, seed)
    a, b = brute_force_2s(inst, m1), milp_2s(inst, m1)
    assert (a is None) == (b is None)
    if a is not None:
        assert a[1] == b[1] and len(b[0] & m1) >= inst.k


@pytest.mark.parametrize("seed", range(25))
def test_zero_cost_pair_agrees_with_milp(seed):
    import random
    rng = random.Random(seed)
    n = 6
    costs = {(i, j): (rng.choice([0, 0, 1]), rng.choice([0, 0, 1]))
             for i in range(1, n + 1) for j in range(1, n + 1) if rng.random() < 0.6}
    inst = Instance(n, costs, rng.randint(0, n))
    z = zero_cost_pair(inst)
    m = milp_recovap(inst, zero_cost_only=True)
    assert (z is None) == (m is None)
    if z is not None:
        rep = validate_solution(inst, z)
        assert rep.feasible and rep.cost == 0
