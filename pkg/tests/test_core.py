import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recovap.core import (INF, Instance, InstanceError, IntervalUncertainty, SolutionPair, cycle_decomposition,
                          matching, validate_solution, worst_case_instance)


def k22(c1, c2, k):
    return Instance.from_matrices(c1, c2, k)


ZERO = [[0, 0], [0, 0]]


def test_instance_rejects_bad_input():
    with pytest.raises(InstanceError):
        Instance(0, {}, 0)
    with pytest.raises(InstanceError):
        Instance(2, {}, 3)
    with pytest.raises(InstanceError):
        Instance(2, {(1, 3): (0, 0)}, 0)
    with pytest.raises(InstanceError):
        Instance(2, {(1, 1): (INF, INF)}, 0)
    with pytest.raises(InstanceError):
        Instance.from_edges(2, [(1, 1, 0, 0), (1, 1, 2, 2)])
    with pytest.raises(InstanceError):
        Instance(2, {(1, 1): (0.5, 0)}, 0)


def test_instance_is_immutable():
    inst = k22(ZERO, ZERO, 1)
    with pytest.raises(TypeError):
        inst.costs[(1, 1)] = (1, 1)
    assert inst.with_k(2).k == 2 and inst.k == 1


def test_inf_is_math_inf():
    assert INF == math.inf
    inst = Instance.from_edges(2, [(1, 1, INF, 3)])
    assert inst.c1((1, 1)) == INF and inst.c2((1, 1)) == 3


def test_validate_identity_pair():
    inst = k22(ZERO, ZERO, 1)
    rep = validate_solution(inst, SolutionPair.build(inst, [(1, 1), (2, 2)], [(1, 1), (2, 2)]))
    assert rep.feasible and rep.cost == 0 and rep.intersection == 2


def test_validate_disjoint_pair_infeasible():
    inst = k22(ZERO, ZERO, 1)
    rep = validate_solution(inst, SolutionPair.build(inst, [(1, 1), (2, 2)], [(1, 2), (2, 1)]))
    assert not rep.feasible and rep.intersection == 0


def test_validate_reports_unmatched_vertex():
    inst = k22(ZERO, ZERO, 1)
    rep = validate_solution(inst, ([(1, 1)], [(1, 1), (2, 2)]))
    assert not rep.feasible
    assert "u_2 unmatched" in rep.violation


def test_validate_never_raises_on_garbage():
    inst = k22(ZERO, ZERO, 0)
    for bad in [([(9, 9)], []), ([("a", 1)], []), (None, None), ([(1, 1), (1, 2)], [(1, 1), (2, 2)])]:
        rep = validate_solution(inst, bad)
        assert not rep.feasible and rep.violation


def test_validate_rejects_inf_edge_in_m1():
    inst = Instance.from_edges(2, [(1, 1, INF, 0), (2, 2, 0, 0), (1, 2, 0, 0), (2, 1, 0, 0)], 0)
    rep = validate_solution(inst, ([(1, 1), (2, 2)], [(1, 1), (2, 2)]))
    assert not rep.feasible


def test_cycles_equal_matchings():
    cyc = cycle_decomposition([(1, 1), (2, 2)], [(1, 1), (2, 2)])
    assert [c.kind for c in cyc] == ["two", "two"]


def test_cycles_single_four_cycle():
    (c,) = cycle_decomposition([(1, 1), (2, 2)], [(1, 2), (2, 1)])
    assert c.kind == "long" and c.length == 4
    assert c.rows == {1, 2} and c.cols == {1, 2}


def test_cycles_six_cycle():
    (c,) = cycle_decomposition([(1, 1), (2, 2), (3, 3)], [(1, 2), (2, 3), (3, 1)])
    assert c.length == 6


def test_cycles_reject_non_perfect():
    with pytest.raises(InstanceError):
        cycle_decomposition([(1, 1)], [(1, 1), (2, 2)], 2)


perms = st.integers(1, 7).flatmap(lambda n: st.tuples(st.permutations(range(1, n + 1)),
                                                      st.permutations(range(1, n + 1))))


@given(perms)
@settings(max_examples=200, deadline=None)
def test_cycle_decomposition_properties(pp):
    p1, p2 = pp
    n = len(p1)
    m1 = matching((i + 1, p1[i]) for i in range(n))
    m2 = matching((i + 1, p2[i]) for i in range(n))
    cycles = cycle_decomposition(m1, m2, n)
    assert sum(c.length for c in cycles) == 2 * n
    assert sum(1 for c in cycles if c.kind == "two") == len(m1 & m2)
    covered = [e for c in cycles for e in c.edges]
    assert set(covered) == set(m1 | m2)
    for c in cycles:
        if c.kind == "long":
            # strict alternation
            for a, e in enumerate(c.edges):
                assert (e in m1) == (a % 2 == 0)


def test_worst_case_instance_examples():
    n = 2
    edges = [(i, j) for i in (1, 2) for j in (1, 2)]
    u = IntervalUncertainty(n, {e: 0 for e in edges}, {e: 1 for e in edges}, {e: 2 for e in edges}, 0)
    inst = worst_case_instance(u)
    assert all(inst.c2(e) == 3 for e in edges) and inst.k == 2
    u0 = IntervalUncertainty(n, {e: 0 for e in edges}, {e: 1 for e in edges}, {e: 0 for e in edges}, n)
    inst0 = worst_case_instance(u0)
    assert all(inst0.c2(e) == 1 for e in edges) and inst0.k == 0
    with pytest.raises(InstanceError):
        IntervalUncertainty(n, {e: 0 for e in edges}, {e: 1 for e in edges}, {e: 0 for e in edges}, 3)
    with pytest.raises(InstanceError):
        IntervalUncertainty(n, {e: 0 for e in edges}, {e: 1 for e in edges}, {e: -1 for e in edges}, 0)
