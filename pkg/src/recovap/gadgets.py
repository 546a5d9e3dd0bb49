"""Grid Tiling reductions to RecovAP for the parameters k and k' = n - k.

Both constructions share one wire layout.  For row ``i`` a star with centre
``z`` picks a value ``a``: ``z`` is matched to the spoke ``s[a]`` and the
wire of ``a`` is pushed one position forward.  A wire runs through the
cells ``(i, 1) .. (i, ell)``; in each cell it forks into one branch per
tuple with row value ``a`` and joins again.  A pushed wire must pass
through exactly one branch per cell, a resting wire through none, and the
last cell of the pushed wire is absorbed by a terminal ``Z``.  Columns are
built the same way.

Parameter k.  Row edges cost (0,1) and column edges (1,0), so at cost 0
M1 lives on the row wires and M2 on the column wires.  A branch of a row
wire and a branch of a column wire share the (0,0) tuple edge
``left - right``, which a pushed wire takes.  Helper vertices give each
row vertex an M2 partner and each column vertex an M1 partner.  M1 and M2
then share at most one tuple edge per cell, and ``ell**2`` shared edges
mean every cell agrees with the row and column choices.

Parameter k'.  All wire edges cost (0,0) and both matchings use both kinds
of wire.  Each tuple gets a gadget joining its row branch and its column
branch: a centre path ``hub_l .. hub_r`` and two 4-cycles through corner
vertices.  Idle, both matchings take the centre path with its ends.
Selected, the four branch slots enter the gadget; M1 pairs the column
entry with ``hub_r`` and M2 pairs the row entry with it (and symmetrically
at the exits), so the two matchings differ on 4 edges each.  A mixed
state leaves M1 and M2 on opposite parities of the centre path.  The star
legs, the branch connectors and the centre path are odd paths of length
``4 ell**2 + 1``, so any such disagreement costs more than
``k' = 4 ell**2`` edges.

Sizes (``T`` = total number of tuples, ``n`` = value range, ``h = 2 ell^2``):
    k-version:  ``3 ell (n+1) + 6 ell^2 n + 4 T`` vertices per side
    k'-version: ``2 ell + 2 ell n (1+h) + 4 ell^2 n + 6 T + 5 h T`` vertices per side
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .core import Instance, InstanceError, SolutionPair, validate_solution

ROW, COL = "r", "c"


@dataclass(frozen=True)
class GridTilingInstance:
    ell: int
    nvals: int
    cells: Mapping  # (i, j) -> frozenset of (a, b)

    def __post_init__(self):
        if self.ell < 1 or self.nvals < 1:
            raise InstanceError("ell and nvals must be positive")
        cells = {}
        for i in range(1, self.ell + 1):
            for j in range(1, self.ell + 1):
                tup = frozenset((int(a), int(b)) for a, b in self.cells.get((i, j), ()))
                for a, b in tup:
                    if not (1 <= a <= self.nvals and 1 <= b <= self.nvals):
                        raise InstanceError(f"tuple ({a},{b}) in cell ({i},{j}) out of range")
                cells[(i, j)] = tup
        for key in self.cells:
            if key not in cells:
                raise InstanceError(f"cell {key} outside the {self.ell}x{self.ell} grid")
        object.__setattr__(self, "cells", cells)

    @property
    def tuple_count(self) -> int:
        return sum(len(t) for t in self.cells.values())

    def satisfied_by(self, rows, cols) -> bool:
        return all((rows[i - 1], cols[j - 1]) in self.cells[(i, j)] for (i, j) in self.cells)

    def normalized(self) -> tuple["GridTilingInstance", dict[int, int]]:
        """Rename values so that exactly the used ones remain, as ``1..n'``.

        Returns the renamed instance and the map from new to old values.
        """
        used = sorted({v for ts in self.cells.values() for t in ts for v in t})
        fwd = {v: a + 1 for a, v in enumerate(used)}
        cells = {c: {(fwd[a], fwd[b]) for a, b in ts} for c, ts in self.cells.items()}
        return GridTilingInstance(self.ell, max(len(used), 1), cells), {b: a for a, b in fwd.items()}


def random_grid_tiling(ell: int, nvals: int, seed: int, density: float = 0.5) -> GridTilingInstance:
    rng = random.Random(seed)
    cells = {(i, j): {(a, b) for a in range(1, nvals + 1) for b in range(1, nvals + 1) if rng.random() < density}
             for i in range(1, ell + 1) for j in range(1, ell + 1)}
    return GridTilingInstance(ell, nvals, cells)


def solve_grid_tiling(gt: GridTilingInstance, max_work: int = 10 ** 7) -> Optional[tuple[tuple, tuple]]:
    """First ``(rows, cols)`` in lexicographic order satisfying every cell, or ``None``."""
    if gt.nvals ** gt.ell > max_work:
        raise InstanceError(f"grid tiling search over {gt.nvals}^{gt.ell} row choices exceeds budget")
    vals = range(1, gt.nvals + 1)
    for rows in itertools.product(vals, repeat=gt.ell):
        cols = []
        for j in range(1, gt.ell + 1):
            ok = [b for b in vals if all((rows[i - 1], b) in gt.cells[(i, j)] for i in range(1, gt.ell + 1))]
            if not ok:
                break
            cols.append(ok[0])
        else:
            return tuple(rows), tuple(cols)
    return None


@dataclass
class _Wire:
    """One value's wire; lists are per cell in order."""

    leg: list  # star edges when resting
    leg_push: list  # star edges when pushed
    cells: list = field(default_factory=list)  # dicts with rest edges and per-tuple push edges


@dataclass
class GadgetInstance:
    instance: Instance
    target_k: int
    dual: bool
    tuple_edge_index: dict  # ((i, j), (a, b)) -> edge (k-version) or gadget edges (k'-version)
    selection_index: dict  # (ROW/COL, line, value) -> star edge
    names: tuple = ()  # (left names, right names), 1-based positions
    _parts: dict = field(default_factory=dict, repr=False)

    @property
    def kprime(self) -> int:
        return self.instance.n - self.instance.k


class _Builder:
    def __init__(self):
        self.left: dict = {}
        self.right: dict = {}
        self.costs: dict = {}

    def L(self, name):
        if name not in self.left:
            self.left[name] = len(self.left) + 1
        return name

    def R(self, name):
        if name not in self.right:
            self.right[name] = len(self.right) + 1
        return name

    def edge(self, l, r, cost):
        key = (l, r)
        if key in self.costs and self.costs[key] != cost:
            raise AssertionError(f"edge {key} built twice with different costs")
        self.costs[key] = cost
        return key


def _path(b: _Builder, name: tuple, start, end, length: int, cost) -> tuple[list, list]:
    """Odd path ``start (L) .. end (R)``; returns (edges covering both ends, interior edges)."""
    seq = [start]
    for t in range(1, length):
        seq.append(b.R(name + (t,)) if t % 2 else b.L(name + (t,)))
    seq.append(end)
    ends, inner = [], []
    for p in range(len(seq) - 1):
        if p % 2 == 0:
            ends.append(b.edge(seq[p], seq[p + 1], cost))
        else:
            inner.append(b.edge(seq[p + 1], seq[p], cost))
    return ends, inner


def _build_structure(b: _Builder, gt: GridTilingInstance, kind: str, cost, slot, leg_len: int) -> dict:
    """Wires for all rows (or columns).  ``slot(tuple_key)`` returns the (L, R) pair of the branch slot."""
    ell, n = gt.ell, gt.nvals
    wires = {}
    for line in range(1, ell + 1):
        z = b.L((kind, "z", line))
        term = b.R((kind, "Z", line))
        for a in range(1, n + 1):
            s = b.R((kind, "s", line, a))
            x = b.L((kind, "x", line, a))
            star = b.edge(z, s, cost)
            b.edge(x, s, cost)
            w = _Wire(leg=[(x, s)], leg_push=[(z, s)])
            entry = x
            cells = []
            for other in range(1, ell + 1):
                cell = (line, other) if kind == ROW else (other, line)
                tuples = sorted(t for t in gt.cells[cell] if (t[0] if kind == ROW else t[1]) == a)
                B = b.R((kind, "B", line, a, other))
                ch = b.L((kind, "ch", line, a, other))
                chE = b.R((kind, "chE", line, a, other))
                chER = b.L((kind, "chER", line, a, other))
                # the first cell is reached through the star leg
                push, rest = _path(b, (kind, "p", line, a, other), entry, B,
                                   leg_len if other == 1 else 1, cost)
                rest += [b.edge(ch, B, cost), b.edge(chER, chE, cost)]
                branches = {}
                for tup in tuples:
                    key = (cell, tup)
                    sl, sr = slot(key)
                    st = b.R((kind, "St", line, a, other, tup))
                    en = b.L((kind, "En", line, a, other, tup))
                    in_push, in_rest = _path(b, (kind, "bi", line, a, other, tup), ch, st, leg_len, cost)
                    out_push, out_rest = _path(b, (kind, "bo", line, a, other, tup), en, chE, leg_len, cost)
                    branches[tup] = {
                        "rest": in_rest + out_rest + [b.edge(sl, st, cost), b.edge(en, sr, cost)],
                        "push": in_push + out_push,
                    }
                cells.append({"cell": cell, "rest": rest, "push": push, "branches": branches})
                entry = chER
            b.edge(chER, term, cost)
            cells[-1]["push_out"] = [(chER, term)]
            w.cells = cells
            wires[(line, a)] = (w, star)
    return wires


def grid_tiling_to_recovap(gt: GridTilingInstance, complete: bool = False) -> GadgetInstance:
    """Reduction for parameter k: cost-0 pair with ``ell**2`` shared edges iff ``gt`` is solvable."""
    return _reduce(gt, dual=False, complete=complete)


def grid_tiling_to_recovap_dual(gt: GridTilingInstance, complete: bool = False) -> GadgetInstance:
    """Reduction for parameter k' = 4 ell**2: cost-0 pair with ``n - 4 ell**2`` shared edges iff solvable."""
    return _reduce(gt, dual=True, complete=complete)


def _reduce(gt: GridTilingInstance, dual: bool, complete: bool) -> GadgetInstance:
    b = _Builder()
    ell = gt.ell
    kp = 4 * ell * ell
    slots: dict = {}
    tuple_index: dict = {}

    def slot_k(key):
        if key not in slots:
            slots[key] = (b.L(("t", "left", key)), b.R(("t", "right", key)))
            tuple_index[key] = b.edge(slots[key][0], slots[key][1], (0, 0))
        return slots[key]

    def slot_dual(kind):
        def f(key):
            return b.L((kind, "Ls", key)), b.R((kind, "Rs", key))
        return f

    if dual:
        rcost = ccost = (0, 0)
        leg_len = kp + 1
        rows = _build_structure(b, gt, ROW, rcost, slot_dual(ROW), leg_len)
        cols = _build_structure(b, gt, COL, ccost, slot_dual(COL), leg_len)
        for cell, tups in gt.cells.items():
            for tup in sorted(tups):
                key = (cell, tup)
                lr, rr = b.L((ROW, "Ls", key)), b.R((ROW, "Rs", key))
                lc, rc = b.L((COL, "Ls", key)), b.R((COL, "Rs", key))
                hub_r, hub_l = b.R(("g", "hub", key)), b.L(("g", "hub", key))
                cr, cl = b.R(("g", "corner", key)), b.L(("g", "corner", key))
                # centre path: matched with its ends when idle, without them when selected
                ends, inner = _path(b, ("g", "mid", key), hub_l, hub_r, leg_len, (0, 0))
                corners = b.edge(cl, cr, (0, 0))
                only1 = [b.edge(lc, hub_r, (0, 1)), b.edge(lr, cr, (0, 1)),
                         b.edge(hub_l, rc, (0, 1)), b.edge(cl, rr, (0, 1))]
                only2 = [b.edge(lr, hub_r, (1, 0)), b.edge(lc, cr, (1, 0)),
                         b.edge(hub_l, rr, (1, 0)), b.edge(cl, rc, (1, 0))]
                tuple_index[key] = {"idle": ends + [corners], "m1": only1 + inner, "m2": only2 + inner}
    else:
        rows = _build_structure(b, gt, ROW, (0, 1), slot_k, 1)
        cols = _build_structure(b, gt, COL, (1, 0), slot_k, 1)
        # helpers: pair row and column vertices of each side that are not tuple vertices
        tl = {v for v, _ in slots.values()}
        tr = {v for _, v in slots.values()}
        for side, own, other in (("L", b.left, b.right), ("R", b.right, b.left)):
            tset = tl if side == "L" else tr
            rv = [v for v in own if v[0] == ROW and v not in tset]
            cv = [v for v in own if v[0] == COL and v not in tset]
            assert len(rv) == len(cv)
            for t, (vr, vc) in enumerate(zip(rv, cv)):
                if side == "L":
                    h = b.R(("h", "R", t))
                    b.edge(vc, h, (0, 1))
                    b.edge(vr, h, (1, 0))
                else:
                    h = b.L(("h", "L", t))
                    b.edge(h, vc, (0, 1))
                    b.edge(h, vr, (1, 0))
    if len(b.left) != len(b.right):
        raise AssertionError("gadget graph is unbalanced")
    n = len(b.left)
    costs = {(b.left[l], b.right[r]): c for (l, r), c in b.costs.items()}
    if complete:
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                costs.setdefault((i, j), (1, 1))
    k = n - kp if dual else ell * ell
    inst = Instance(n, costs, k)
    sel = {}
    for kind, wires in ((ROW, rows), (COL, cols)):
        for (line, a), (_, star) in wires.items():
            sel[(kind, line, a)] = (b.left[star[0]], b.right[star[1]])
    lnames = tuple(sorted(b.left, key=b.left.get))
    rnames = tuple(sorted(b.right, key=b.right.get))
    idx = lambda e: (b.left[e[0]], b.right[e[1]])
    if dual:
        tix = {key: {k2: [idx(e) for e in es] for k2, es in d.items()} for key, d in tuple_index.items()}
    else:
        tix = {key: idx(e) for key, e in tuple_index.items()}
    g = GadgetInstance(inst, k, dual, tix, sel, (lnames, rnames))
    g._parts = {"builder": b, "rows": rows, "cols": cols, "gt": gt, "index": idx}
    return g


def _wire_edges(wires, choice: dict, tuples_for_line) -> list:
    """Edges of all wires of one structure given the chosen value per line."""
    out = []
    for (line, a), (w, _) in wires.items():
        pushed = choice[line] == a
        out += w.leg_push if pushed else w.leg
        for c in w.cells:
            if pushed:
                out += c["push"]
                pick = tuples_for_line(line, c["cell"])
                if pick not in c["branches"]:
                    raise InstanceError(f"tuple {pick} not available in cell {c['cell']}")
                for tup, br in c["branches"].items():
                    out += br["push"] if tup == pick else br["rest"]
                out += c.get("push_out", [])
            else:
                out += c["rest"]
                for br in c["branches"].values():
                    out += br["rest"]
    return out


def encode_certificate(g: GadgetInstance, witness: tuple) -> SolutionPair:
    """Cost-0 pair realising a Grid Tiling solution ``(rows, cols)``."""
    rows_v, cols_v = witness
    gt: GridTilingInstance = g._parts["gt"]
    if not gt.satisfied_by(rows_v, cols_v):
        raise InstanceError("witness does not satisfy the grid tiling instance")
    b: _Builder = g._parts["builder"]
    idx = g._parts["index"]
    rchoice = {i: rows_v[i - 1] for i in range(1, gt.ell + 1)}
    cchoice = {j: cols_v[j - 1] for j in range(1, gt.ell + 1)}
    pick = lambda cell: (rows_v[cell[0] - 1], cols_v[cell[1] - 1])
    redges = _wire_edges(g._parts["rows"], rchoice, lambda line, cell: pick(cell))
    cedges = _wire_edges(g._parts["cols"], cchoice, lambda line, cell: pick(cell))
    if g.dual:
        common = [idx(e) for e in redges + cedges]
        m1, m2 = list(common), list(common)
        for key, parts in g.tuple_edge_index.items():
            cell, tup = key
            if pick(cell) == tup:
                m1 += parts["m1"]
                m2 += parts["m2"]
            else:
                m1 += parts["idle"]
                m2 += parts["idle"]
    else:
        # tuple edges appear in the pushed branches as slot pairs; add them explicitly
        tuple_edges = [g.tuple_edge_index[(cell, pick(cell))] for cell in gt.cells]
        helpers1, helpers2 = [], []
        for (l, r), c in b.costs.items():
            if l[0] == "h" or r[0] == "h":
                (helpers1 if c == (0, 1) else helpers2).append(idx((l, r)))
        m1 = [idx(e) for e in redges] + tuple_edges + helpers1
        m2 = [idx(e) for e in cedges] + tuple_edges + helpers2
    pair = SolutionPair.build(g.instance, m1, m2)
    rep = validate_solution(g.instance, pair)
    if not rep.feasible or rep.cost != 0:
        raise AssertionError(f"encoded certificate invalid: {rep}")
    return pair


def decode_certificate(g: GadgetInstance, pair) -> tuple[tuple, tuple]:
    """Row and column values selected by a feasible cost-0 pair."""
    rep = validate_solution(g.instance, pair)
    if not rep.feasible:
        raise InstanceError(f"pair is infeasible: {rep.violation}")
    if rep.cost != 0:
        raise InstanceError(f"pair has cost {rep.cost} > 0")
    m1 = pair.m1 if isinstance(pair, SolutionPair) else frozenset(pair[0])
    m2 = pair.m2 if isinstance(pair, SolutionPair) else frozenset(pair[1])
    gt: GridTilingInstance = g._parts["gt"]
    out = []
    for kind, m in ((ROW, m1), (COL, m2)):
        vals = []
        for line in range(1, gt.ell + 1):
            hit = [a for a in range(1, gt.nvals + 1) if g.selection_index[(kind, line, a)] in m]
            if len(hit) != 1:
                raise InstanceError(f"{kind} {line} selects {len(hit)} values")
            vals.append(hit[0])
        out.append(tuple(vals))
    return out[0], out[1]


def gadget_size(gt: GridTilingInstance, dual: bool) -> int:
    """Vertices per side of the reduced instance."""
    ell, n, t = gt.ell, gt.nvals, gt.tuple_count
    if dual:
        h = 2 * ell * ell
        return 2 * ell + 2 * ell * n * (1 + h) + 4 * ell ** 2 * n + 6 * t + 5 * h * t
    return 3 * ell * (n + 1) + 6 * ell ** 2 * n + 4 * t
