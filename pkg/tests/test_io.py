import pytest

from recovap.core import INF, Instance
from recovap.gadgets import GridTilingInstance, random_grid_tiling
from recovap.generators import random_exact_instance, random_instance
from recovap.io import (ParseError, dump_exact, dump_grid_tiling, dump_instance, dump_solution, parse_exact,
                        parse_grid_tiling, parse_instance, parse_matching, parse_solution)


@pytest.mark.parametrize("seed", range(10))
def test_instance_round_trip(seed):
    inst = random_instance(1 + seed % 5, 0.6, seed, k=seed % 2)
    text = dump_instance(inst, ["hello"])
    assert text.startswith("# hello\n")
    assert parse_instance(text) == inst


def test_inf_costs_round_trip():
    inst = Instance.from_edges(2, [(1, 1, INF, 3), (2, 2, 4, INF)], 0)
    text = dump_instance(inst)
    assert "e 1 1 inf 3" in text
    assert parse_instance(text) == inst


@pytest.mark.parametrize("text, where", [
    ("e 1 1 0 0\n", None),
    ("p recovap 2 1 0\ne 1 3 0 0\n", 2),
    ("p recovap 2 2 0\ne 1 1 0 0\ne 1 1 1 1\n", 3),
    ("p recovap 2 1 0\ne 1 1 x 0\n", 2),
    ("p recovap 2 1 0\ne 1 1 inf inf\n", 2),
    ("p recovap 2 2 0\ne 1 1 0 0\n", None),
    ("p recovap 2 1 0\nq 1 1 0 0\n", 2),
    ("p recovap 2 0 3\n", None),
])
def test_instance_rejections(text, where):
    with pytest.raises(ParseError) as ei:
        parse_instance(text)
    assert ei.value.line == where


def test_comments_and_solution_lines_ignored():
    text = "# c\np recovap 1 1 1   # header\n\ne 1 1 2 3\ns 5\nm1 1 1\nm2 1 1\n"
    inst = parse_instance(text)
    assert inst.n == 1 and inst.k == 1


def test_solution_round_trip():
    text = dump_solution(7, [(1, 2), (2, 1)], [(1, 1), (2, 2)])
    cost, m1, m2 = parse_solution(text)
    assert cost == 7 and m1 == {(1, 2), (2, 1)} and m2 == {(1, 1), (2, 2)}
    assert parse_solution(dump_solution(INF))[0] == INF


def test_matching_tagged_or_bare():
    assert parse_matching("m1 1 2\nm1 2 1\nm2 1 1\n") == {(1, 2), (2, 1)}
    assert parse_matching("1 1\n2 2\n", n=2) == {(1, 1), (2, 2)}
    with pytest.raises(ParseError):
        parse_matching("1 3\n", n=2)
    with pytest.raises(ParseError):
        parse_matching("# nothing\n")


@pytest.mark.parametrize("seed", range(6))
def test_exact_round_trip(seed):
    g = random_exact_instance(4, 0.7, seed, with_costs=seed % 2 == 1)
    assert parse_exact(dump_exact(g)) == g


def test_exact_rejections():
    with pytest.raises(ParseError):
        parse_exact("p exact 2 2 1 0\ne 1 1\nr 2 2\n")
    with pytest.raises(ParseError):
        parse_exact("p exact 2 2 2 0\ne 1 1 3\ne 2 2\n")


@pytest.mark.parametrize("seed", range(6))
def test_grid_tiling_round_trip(seed):
    gt = random_grid_tiling(2, 3, seed)
    assert parse_grid_tiling(dump_grid_tiling(gt)) == gt


def test_grid_tiling_rejections():
    with pytest.raises(ParseError):
        parse_grid_tiling("p gt 1 2\nc 2 1 1 1\n")
    with pytest.raises(ParseError):
        parse_grid_tiling("p gt 1 2\nc 1 1 1 1 1 1\n")
    with pytest.raises(ParseError):
        parse_grid_tiling("p gt 1 2\nc 1 1 1\n")


def test_empty_cell_written():
    gt = GridTilingInstance(1, 1, {})
    assert "c 1 1" in dump_grid_tiling(gt)
    assert parse_grid_tiling(dump_grid_tiling(gt)) == gt
