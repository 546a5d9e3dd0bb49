import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from recovap.assignment import ApProblem, solve_ap, solve_ap_with_forced, solve_matrix
from recovap.core import INF, InstanceError


def brute(mat, must=()):
    n = len(mat)
    best = None
    for p in itertools.permutations(range(n)):
        if any(p[i] != j for i, j in must):
            continue
        c = sum(mat[i][p[i]] for i in range(n))
        if c != INF and (best is None or c < best):
            best = c
    return best


def holey(n, seed, p_inf=0.3):
    rng = random.Random(seed)
    return [[INF if rng.random() < p_inf else rng.randint(-9, 20) for _ in range(n)] for _ in range(n)]


def test_zero_matrix():
    assert solve_matrix([[0] * 3 for _ in range(3)])[1] == 0


def test_small_by_hand():
    pairs, cost = solve_matrix([[1, 2], [3, 1]])
    assert cost == 2 and sorted(pairs) == [(1, 1), (2, 2)]  # 1-based


@pytest.mark.parametrize("seed", range(40))
def test_holes_match_brute_force(seed):
    mat = holey(5, seed)
    res = solve_matrix(mat)
    want = brute(mat)
    if want is None:
        assert res is None
    else:
        assert res[1] == want
        assert sum(mat[i - 1][j - 1] for i, j in res[0]) == want


@pytest.mark.parametrize("seed", range(20))
def test_dense_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12))
    mat = rng.integers(-50, 50, size=(n, n))
    r, c = linear_sum_assignment(mat)
    assert solve_matrix(mat.tolist())[1] == int(mat[r, c].sum())


def test_infeasible():
    assert solve_matrix([[INF, INF], [0, 0]]) is None
    assert solve_ap(ApProblem((1, 2), (1, 2), {(1, 1): 3, (2, 1): 4})) is None


def test_empty_problem():
    assert solve_ap(ApProblem((), (), {})) == (frozenset(), 0)


def test_ids_are_kept():
    p = ApProblem((4, 7), (2, 9), {(4, 9): 1, (7, 2): 1, (4, 2): 5, (7, 9): 5})
    pairs, cost = solve_ap(p)
    assert cost == 2 and sorted(pairs) == [(4, 9), (7, 2)]


def test_forced_full_diagonal():
    mat = [[1, 0, 0], [0, 2, 0], [0, 0, 3]]
    p = ApProblem.from_matrix(mat)
    _, cost = solve_ap_with_forced(p, [(1, 1), (2, 2), (3, 3)])
    assert cost == 6


def test_forced_empty_equals_plain():
    p = ApProblem.from_matrix(holey(4, 3, 0.1))
    assert solve_ap_with_forced(p, []) == solve_ap(p)


@pytest.mark.parametrize("seed", range(20))
def test_one_forced_edge(seed):
    mat = holey(4, 100 + seed, 0.2)
    rng = random.Random(seed)
    i, j = rng.randrange(4), rng.randrange(4)
    res = solve_ap_with_forced(ApProblem.from_matrix(mat), [(i + 1, j + 1)])
    want = brute(mat, [(i, j)])
    assert (res is None) == (want is None)
    if res is not None:
        assert res[1] == want and (i + 1, j + 1) in res[0]


def test_forced_conflict_raises():
    p = ApProblem.from_matrix([[0, 0], [0, 0]])
    with pytest.raises(InstanceError):
        solve_ap_with_forced(p, [(1, 1), (1, 2)])


def test_unequal_sides_rejected():
    with pytest.raises(InstanceError):
        ApProblem((1, 2), (1,), {})


mats = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.one_of(st.just(INF), st.integers(-5, 5)), min_size=n, max_size=n),
                       min_size=n, max_size=n))


@given(mats, st.integers(0, 24), st.integers(-5, 5))
@settings(max_examples=150, deadline=None)
def test_monotone_under_edge_changes(mat, pos, val):
    n = len(mat)
    i, j = divmod(pos % (n * n), n)
    before = solve_matrix(mat)
    added = [row[:] for row in mat]
    if added[i][j] == INF:
        added[i][j] = val
    after = solve_matrix(added)
    # adding an edge never hurts
    if before is not None:
        assert after is not None and after[1] <= before[1]
    removed = [row[:] for row in mat]
    removed[i][j] = INF
    gone = solve_matrix(removed)
    if gone is not None:
        assert before is not None and before[1] <= gone[1]
