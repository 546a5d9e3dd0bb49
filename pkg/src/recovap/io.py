"""Line-oriented text formats.

All formats are 1-indexed, whitespace separated, and allow blank lines and
``#`` comments.

RecovAP instance::

    p recovap <n> <m> <k>
    e <i> <j> <c1> <c2>        (m lines, costs are integers or ``inf``)

An instance file may also carry ``s``/``m1``/``m2`` lines (a solution or a
first-stage matching); :func:`parse_instance` skips them and
:func:`parse_matching` reads them.

Solution::

    s <cost>
    m1 <i> <j>  ...
    m2 <i> <j>  ...

Exact matching (``cost`` optional, all edges or none)::

    p exact <nL> <nR> <m> <k>
    e <i> <j> [cost]
    r <i> <j>

Grid tiling::

    p gt <ell> <n>
    c <i> <j> <a1> <b1> <a2> <b2> ...
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

from .core import INF, Cost, ExactMatchingInstance, Instance, InstanceError, Matching, SolutionPair, matching
from .gadgets import GridTilingInstance


class ParseError(InstanceError):
    def __init__(self, msg: str, line: Optional[int] = None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if body:
            yield no, body


def _int(tok: str, no: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"{what} {tok!r} is not an integer", no) from None


def _cost(tok: str, no: int) -> Cost:
    if tok.lower() in ("inf", "+inf"):
        return INF
    return _int(tok, no, "cost")


def _fmt(c: Cost) -> str:
    return "inf" if c == INF else str(c)


def _header(text: str, kind: str, nfields: int) -> tuple[int, list[int], list]:
    rows = list(_lines(text))
    if not rows or rows[0][1][0] != "p":
        raise ParseError(f"missing 'p {kind}' header")
    no, toks = rows[0]
    if len(toks) != nfields + 2 or toks[1] != kind:
        raise ParseError(f"expected 'p {kind}' with {nfields} fields", no)
    return no, [_int(t, no, "header field") for t in toks[2:]], rows[1:]


def _check_edge(i: int, j: int, nl: int, nr: int, seen: set, no: int):
    if not (1 <= i <= nl and 1 <= j <= nr):
        raise ParseError(f"edge ({i},{j}) out of range", no)
    if (i, j) in seen:
        raise ParseError(f"duplicate edge ({i},{j})", no)
    seen.add((i, j))


# --- RecovAP instances -------------------------------------------------------

def parse_instance(text: str) -> Instance:
    _, (n, m, k), rows = _header(text, "recovap", 3)
    costs = {}
    seen: set = set()
    for no, toks in rows:
        if toks[0] in ("s", "m1", "m2"):
            continue
        if toks[0] != "e" or len(toks) != 5:
            raise ParseError("expected 'e i j c1 c2'", no)
        i, j = _int(toks[1], no, "index"), _int(toks[2], no, "index")
        _check_edge(i, j, n, n, seen, no)
        c1, c2 = _cost(toks[3], no), _cost(toks[4], no)
        if c1 == INF and c2 == INF:
            raise ParseError(f"edge ({i},{j}) has both costs inf", no)
        costs[(i, j)] = (c1, c2)
    if len(costs) != m:
        raise ParseError(f"header announces {m} edges, found {len(costs)}")
    if n < 1 or not 0 <= k <= n:
        raise ParseError(f"invalid n={n} or k={k}")
    return Instance(n, costs, k)


def dump_instance(inst: Instance, comments: Iterable[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"p recovap {inst.n} {inst.m} {inst.k}")
    out += [f"e {i} {j} {_fmt(a)} {_fmt(b)}" for (i, j), (a, b) in sorted(inst.costs.items())]
    return "\n".join(out) + "\n"


# --- solutions and matchings ---------------------------------------------------

def dump_solution(cost: Cost, m1: Optional[Iterable] = None, m2: Optional[Iterable] = None) -> str:
    out = [f"s {_fmt(cost)}"]
    for tag, m in (("m1", m1), ("m2", m2)):
        if m is not None:
            out += [f"{tag} {i} {j}" for i, j in sorted(m)]
    return "\n".join(out) + "\n"


def dump_pair(pair: SolutionPair) -> str:
    return dump_solution(pair.cost, pair.m1, pair.m2)


def parse_solution(text: str) -> tuple[Optional[Cost], Matching, Matching]:
    cost = None
    parts = {"m1": [], "m2": []}
    for no, toks in _lines(text):
        if toks[0] == "s":
            if len(toks) != 2 or cost is not None:
                raise ParseError("expected a single 's <cost>' line", no)
            cost = _cost(toks[1], no)
        elif toks[0] in parts:
            if len(toks) != 3:
                raise ParseError(f"expected '{toks[0]} i j'", no)
            parts[toks[0]].append((_int(toks[1], no, "index"), _int(toks[2], no, "index")))
    out = []
    for tag in ("m1", "m2"):
        m = matching(parts[tag])
        if len(m) != len(parts[tag]):
            raise ParseError(f"duplicate edge in {tag}")
        out.append(m)
    return cost, out[0], out[1]


def parse_matching(text: str, n: Optional[int] = None, tag: str = "m1") -> Matching:
    """Edges from ``<tag> i j`` lines, or from bare ``i j`` lines if there are none."""
    tagged, bare = [], []
    for no, toks in _lines(text):
        if toks[0] == tag and len(toks) == 3:
            tagged.append((no, toks[1:]))
        elif len(toks) == 2 and toks[0].lstrip("-").isdigit():
            bare.append((no, toks))
    src = tagged or bare
    seen: set = set()
    for no, (a, b) in src:
        i, j = _int(a, no, "index"), _int(b, no, "index")
        if n is not None and not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"edge ({i},{j}) out of range", no)
        if (i, j) in seen:
            raise ParseError(f"duplicate edge ({i},{j})", no)
        seen.add((i, j))
    if not seen:
        raise ParseError(f"no '{tag}' edges found")
    return frozenset(seen)


# --- exact matching -------------------------------------------------------------

def parse_exact(text: str) -> ExactMatchingInstance:
    _, (nl, nr, m, k), rows = _header(text, "exact", 4)
    edges: set = set()
    red = []
    costs = {}
    for no, toks in rows:
        if toks[0] == "e" and len(toks) in (3, 4):
            i, j = _int(toks[1], no, "index"), _int(toks[2], no, "index")
            _check_edge(i, j, nl, nr, edges, no)
            if len(toks) == 4:
                costs[(i, j)] = _int(toks[3], no, "cost")
        elif toks[0] == "r" and len(toks) == 3:
            red.append((no, _int(toks[1], no, "index"), _int(toks[2], no, "index")))
        else:
            raise ParseError("expected 'e i j [cost]' or 'r i j'", no)
    if len(edges) != m:
        raise ParseError(f"header announces {m} edges, found {len(edges)}")
    rs = set()
    for no, i, j in red:
        if (i, j) not in edges:
            raise ParseError(f"red mark on missing edge ({i},{j})", no)
        if (i, j) in rs:
            raise ParseError(f"duplicate red mark ({i},{j})", no)
        rs.add((i, j))
    if costs and len(costs) != len(edges):
        raise ParseError("either every edge or no edge carries a cost")
    return ExactMatchingInstance(nl, nr, frozenset(edges), frozenset(rs), k, costs or None)


def dump_exact(g: ExactMatchingInstance, comments: Iterable[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"p exact {g.nl} {g.nr} {len(g.edges)} {g.k}")
    for e in sorted(g.edges):
        out.append(f"e {e[0]} {e[1]}" + (f" {g.costs[e]}" if g.costs is not None else ""))
    out += [f"r {i} {j}" for i, j in sorted(g.red)]
    return "\n".join(out) + "\n"


# --- grid tiling --------------------------------------------------------------------

def parse_grid_tiling(text: str) -> GridTilingInstance:
    _, (ell, nvals), rows = _header(text, "gt", 2)
    cells = {}
    for no, toks in rows:
        if toks[0] != "c" or len(toks) < 3 or len(toks) % 2 == 0:
            raise ParseError("expected 'c i j a1 b1 ...'", no)
        vals = [_int(t, no, "value") for t in toks[1:]]
        i, j = vals[0], vals[1]
        if not (1 <= i <= ell and 1 <= j <= ell):
            raise ParseError(f"cell ({i},{j}) out of range", no)
        if (i, j) in cells:
            raise ParseError(f"duplicate cell ({i},{j})", no)
        tups = list(zip(vals[2::2], vals[3::2]))
        if len(set(tups)) != len(tups):
            raise ParseError(f"duplicate tuple in cell ({i},{j})", no)
        cells[(i, j)] = tups
    return GridTilingInstance(ell, nvals, cells)


def dump_grid_tiling(gt: GridTilingInstance, comments: Iterable[str] = ()) -> str:
    out = [f"# {c}" for c in comments]
    out.append(f"p gt {gt.ell} {gt.nvals}")
    for (i, j) in sorted(gt.cells):
        flat = " ".join(f"{a} {b}" for a, b in sorted(gt.cells[(i, j)]))
        out.append(f"c {i} {j} {flat}".rstrip())
    return "\n".join(out) + "\n"
