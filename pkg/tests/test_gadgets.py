import itertools

import pytest

from recovap.core import InstanceError, SolutionPair, validate_solution
from recovap.gadgets import (GridTilingInstance, decode_certificate, encode_certificate, gadget_size,
                             grid_tiling_to_recovap, grid_tiling_to_recovap_dual, random_grid_tiling,
                             solve_grid_tiling)
from recovap.oracle import milp_recovap

REDUCE = {False: grid_tiling_to_recovap, True: grid_tiling_to_recovap_dual}
ALL2 = [(a, b) for a in (1, 2) for b in (1, 2)]


def ell1_instances():
    yield GridTilingInstance(1, 1, {(1, 1): set()})
    yield GridTilingInstance(1, 1, {(1, 1): {(1, 1)}})
    for r in range(len(ALL2) + 1):
        for sub in itertools.combinations(ALL2, r):
            yield GridTilingInstance(1, 2, {(1, 1): set(sub)})


def test_solver_examples():
    assert solve_grid_tiling(GridTilingInstance(1, 1, {(1, 1): {(1, 1)}})) == ((1,), (1,))
    assert solve_grid_tiling(GridTilingInstance(1, 1, {(1, 1): set()})) is None


@pytest.mark.parametrize("seed", range(20))
def test_solver_witness_checks_out(seed):
    gt = random_grid_tiling(2, 3, seed, 0.7)
    sol = solve_grid_tiling(gt)
    brute = any(gt.satisfied_by(r, c) for r in itertools.product(range(1, 4), repeat=2)
                for c in itertools.product(range(1, 4), repeat=2))
    assert (sol is not None) == brute
    if sol is not None:
        assert gt.satisfied_by(*sol)


def test_grid_tiling_validation():
    with pytest.raises(InstanceError):
        GridTilingInstance(1, 1, {(1, 1): {(2, 1)}})
    with pytest.raises(InstanceError):
        GridTilingInstance(1, 1, {(2, 1): set()})


def test_normalized_renames_used_values():
    gt = GridTilingInstance(1, 5, {(1, 1): {(2, 5), (5, 5)}})
    norm, back = gt.normalized()
    assert norm.nvals == 2 and norm.cells[(1, 1)] == {(1, 2), (2, 2)} and back == {1: 2, 2: 5}


@pytest.mark.parametrize("dual", [False, True])
@pytest.mark.parametrize("seed", range(6))
def test_size_and_parameters(dual, seed):
    gt = random_grid_tiling(1 + seed % 2, 1 + seed % 3, seed)
    g = REDUCE[dual](gt)
    n = g.instance.n
    assert n == gadget_size(gt, dual)
    ell = gt.ell
    if dual:
        assert g.kprime == 4 * ell * ell and g.target_k == n - 4 * ell * ell
    else:
        assert g.target_k == ell * ell
    assert g.instance.k == g.target_k
    allowed = {(0, 0), (0, 1), (1, 0)}
    assert set(g.instance.costs.values()) <= allowed


@pytest.mark.parametrize("dual", [False, True])
def test_complete_flag_adds_unit_edges(dual):
    gt = GridTilingInstance(1, 1, {(1, 1): {(1, 1)}})
    g = REDUCE[dual](gt, complete=True)
    assert g.instance.is_complete() and (1, 1) in set(g.instance.costs.values())
    assert validate_solution(g.instance, encode_certificate(g, ((1,), (1,)))).cost == 0


@pytest.mark.parametrize("dual", [False, True])
@pytest.mark.parametrize("gt", list(ell1_instances()), ids=lambda gt: str(sorted(gt.cells[(1, 1)])))
def test_ell1_equivalence(dual, gt):
    g = REDUCE[dual](gt)
    sol = solve_grid_tiling(gt)
    z = milp_recovap(g.instance, zero_cost_only=True)
    assert (sol is None) == (z is None)
    if sol is not None:
        pair = encode_certificate(g, sol)
        rep = validate_solution(g.instance, pair)
        assert rep.feasible and rep.cost == 0 and rep.intersection >= g.target_k
        assert decode_certificate(g, pair) == sol
        assert gt.satisfied_by(*decode_certificate(g, z))


def test_dual_selected_state():
    gt = GridTilingInstance(1, 2, {(1, 1): {(1, 2), (2, 2)}})
    g = grid_tiling_to_recovap_dual(gt)
    pair = encode_certificate(g, ((1,), (2,)))
    assert len(pair.m1 - pair.m2) == 4 and len(pair.m2 - pair.m1) == 4
    parts = g.tuple_edge_index[((1, 1), (1, 2))]
    assert set(parts["m1"]) <= pair.m1 and set(parts["m2"]) <= pair.m2
    other = g.tuple_edge_index[((1, 1), (2, 2))]
    assert set(other["idle"]) <= pair.m1 & pair.m2


def test_k_version_one_shared_tuple_edge_per_cell():
    gt = random_grid_tiling(2, 2, 4, 0.9)
    sol = solve_grid_tiling(gt)
    assert sol is not None
    g = grid_tiling_to_recovap(gt)
    pair = encode_certificate(g, sol)
    tuple_edges = set(g.tuple_edge_index.values())
    shared = pair.m1 & pair.m2
    assert len(shared) == 4 and shared <= tuple_edges
    assert {e for (cell, _), e in g.tuple_edge_index.items() if e in shared} == shared


def test_encode_rejects_bad_witness():
    gt = GridTilingInstance(1, 2, {(1, 1): {(1, 1)}})
    with pytest.raises(InstanceError):
        encode_certificate(grid_tiling_to_recovap(gt), ((2,), (2,)))


def test_decode_rejects_positive_cost():
    gt = GridTilingInstance(1, 1, {(1, 1): {(1, 1)}})
    g = grid_tiling_to_recovap(gt, complete=True)
    pair = encode_certificate(g, ((1,), (1,)))
    # cross two M1 edges so that M1 uses filler edges
    m1 = sorted(pair.m1)
    (i1, j1), (i2, j2) = m1[0], m1[1]
    swapped = (set(m1) - {(i1, j1), (i2, j2)}) | {(i1, j2), (i2, j1)}
    bad = SolutionPair.build(g.instance, swapped, pair.m2)
    rep = validate_solution(g.instance, bad)
    assert rep.feasible and rep.cost > 0
    with pytest.raises(InstanceError, match="cost"):
        decode_certificate(g, bad)
