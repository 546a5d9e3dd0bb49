"""Dynamic programming over a nice tree decomposition.

Vertices are integers: ``u_i`` is ``i - 1`` and ``v_j`` is ``n + j - 1``.

Per bag vertex and per matching the DP keeps one code: ``AWAIT`` (not yet
matched, its partner comes later), ``DONE`` (matched to a vertex that has
already been forgotten) or the partner vertex (a committed pair inside the
bag).  An edge is charged when it is committed, which happens when its
second endpoint is introduced.  At a join both children contain the same
committed bag pairs, so their cost is subtracted once and their common
edges ``I`` are subtracted from the summed counters.

The intersection counter includes the common bag pairs and saturates at
``k + |I|``; entries at the root are therefore capped at ``k``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import INF, Cost, Instance, InstanceError, SolutionPair

AWAIT = -1
DONE = -2

LEAF, INTRODUCE, FORGET, JOIN = "leaf", "introduce", "forget", "join"


def vname(x: int, n: int) -> str:
    return f"u{x + 1}" if x < n else f"v{x - n + 1}"


def parse_vname(s: str, n: int) -> int:
    if len(s) < 2 or s[0] not in "uv" or not s[1:].isdigit():
        raise InstanceError(f"bad vertex name {s!r}")
    k = int(s[1:])
    if not 1 <= k <= n:
        raise InstanceError(f"vertex {s} out of range 1..{n}")
    return k - 1 if s[0] == "u" else n + k - 1


def graph_of(inst: Instance) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {x: set() for x in range(2 * inst.n)}
    for i, j in inst.costs:
        a, b = i - 1, inst.n + j - 1
        adj[a].add(b)
        adj[b].add(a)
    return adj


@dataclass(frozen=True)
class TreeDecomposition:
    bags: dict  # id -> frozenset of vertices
    tree: tuple  # undirected (id, id) edges

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def neighbours(self) -> dict[int, list[int]]:
        nb: dict[int, list[int]] = {t: [] for t in self.bags}
        for a, b in self.tree:
            nb[a].append(b)
            nb[b].append(a)
        return nb


def check_decomposition(td: TreeDecomposition, adj: dict[int, set[int]]) -> Optional[str]:
    """First violated tree-decomposition invariant, or ``None``."""
    ids = list(td.bags)
    if not ids:
        return "no bags" if adj else None
    if len(td.tree) != len(ids) - 1:
        return "tree has the wrong number of edges"
    nb = td.neighbours()
    seen = {ids[0]}
    stack = [ids[0]]
    while stack:
        t = stack.pop()
        for s in nb[t]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    if len(seen) != len(ids):
        return "tree is disconnected"
    covered = set().union(*td.bags.values())
    for x in adj:
        if x not in covered:
            return f"vertex {x} in no bag"
    for x, ys in adj.items():
        for y in ys:
            if x < y and not any(x in b and y in b for b in td.bags.values()):
                return f"edge ({x},{y}) in no bag"
    for x in covered:
        holders = {t for t, b in td.bags.items() if x in b}
        start = next(iter(holders))
        reach = {start}
        stack = [start]
        while stack:
            t = stack.pop()
            for s in nb[t]:
                if s in holders and s not in reach:
                    reach.add(s)
                    stack.append(s)
        if reach != holders:
            return f"bags containing vertex {x} are not connected"
    return None


def elimination_decomposition(adj: dict[int, set[int]], order: Iterable[int]) -> TreeDecomposition:
    """Decomposition from an elimination ordering; components are chained together."""
    g = {x: set(ys) for x, ys in adj.items()}
    order = list(order)
    pos = {x: a for a, x in enumerate(order)}
    bags = {}
    parent_vertex = {}
    for x in order:
        nbrs = g[x]
        bags[pos[x]] = frozenset(nbrs | {x})
        parent_vertex[x] = min(nbrs, key=pos.__getitem__) if nbrs else None
        for a in nbrs:
            g[a] |= nbrs - {a}
            g[a].discard(x)
        del g[x]
    tree = []
    roots = []
    for x in order:
        p = parent_vertex[x]
        if p is None:
            roots.append(pos[x])
        else:
            tree.append((pos[x], pos[p]))
    for a, b in zip(roots, roots[1:]):
        tree.append((a, b))
    return TreeDecomposition(bags, tuple(tree))


def _greedy_order(adj: dict[int, set[int]], score) -> list[int]:
    g = {x: set(ys) for x, ys in adj.items()}
    order = []
    while g:
        x = min(g, key=lambda v: score(g, v))
        order.append(x)
        nbrs = g.pop(x)
        for a in nbrs:
            g[a] |= nbrs - {a}
            g[a].discard(x)
    return order


def _fill(g, v) -> int:
    nb = list(g[v])
    return sum(1 for a in range(len(nb)) for b in range(a + 1, len(nb)) if nb[b] not in g[nb[a]])


def min_fill_decomposition(inst: Instance) -> TreeDecomposition:
    adj = graph_of(inst)
    return elimination_decomposition(adj, _greedy_order(adj, lambda g, v: (_fill(g, v), len(g[v]), v)))


def min_degree_decomposition(inst: Instance) -> TreeDecomposition:
    adj = graph_of(inst)
    return elimination_decomposition(adj, _greedy_order(adj, lambda g, v: (len(g[v]), -v)))


def side_first_decomposition(inst: Instance, right: bool = False) -> TreeDecomposition:
    """Eliminate one side first; width is at most ``n`` for any bipartite graph."""
    adj = graph_of(inst)
    n = inst.n
    first = range(n, 2 * n) if right else range(n)
    rest = range(n) if right else range(n, 2 * n)
    return elimination_decomposition(adj, list(first) + list(rest))


def best_decomposition(inst: Instance) -> TreeDecomposition:
    """Narrowest of min-fill, min-degree and both side-first orders (earlier wins ties)."""
    cands = [min_fill_decomposition(inst), min_degree_decomposition(inst),
             side_first_decomposition(inst), side_first_decomposition(inst, right=True)]
    return min(cands, key=lambda td: td.width)


def random_order_decomposition(inst: Instance, seed: int) -> TreeDecomposition:
    adj = graph_of(inst)
    order = list(adj)
    random.Random(seed).shuffle(order)
    return elimination_decomposition(adj, order)


@dataclass
class NiceNode:
    kind: str
    bag: tuple  # sorted vertices
    children: list = field(default_factory=list)
    vertex: Optional[int] = None


@dataclass
class NiceTreeDecomposition:
    nodes: list  # of NiceNode; children before parents
    root: int

    @property
    def width(self) -> int:
        return max(len(nd.bag) for nd in self.nodes) - 1


def make_nice(td: TreeDecomposition, adj: Optional[dict[int, set[int]]] = None) -> NiceTreeDecomposition:
    """Binary nice decomposition with empty leaves and an empty root."""
    if adj is not None:
        err = check_decomposition(td, adj)
        if err:
            raise InstanceError(f"invalid tree decomposition: {err}")
    nodes: list[NiceNode] = []

    def add(kind, bag, children, v=None) -> int:
        nodes.append(NiceNode(kind, tuple(sorted(bag)), list(children), v))
        return len(nodes) - 1

    def morph(idx: int, src: frozenset, dst: frozenset) -> int:
        cur = set(src)
        for v in sorted(src - dst):
            cur.discard(v)
            idx = add(FORGET, cur, [idx], v)
        for v in sorted(dst - src):
            cur.add(v)
            idx = add(INTRODUCE, cur, [idx], v)
        return idx

    if not td.bags:
        r = add(LEAF, (), [])
        return NiceTreeDecomposition(nodes, r)
    nb = td.neighbours()
    root = min(td.bags)
    # iterative post-order
    order, parent = [], {root: None}
    stack = [root]
    while stack:
        t = stack.pop()
        order.append(t)
        for s in sorted(nb[t]):
            if s not in parent:
                parent[s] = t
                stack.append(s)
    built: dict[int, int] = {}
    for t in reversed(order):
        bag = td.bags[t]
        kids = [s for s in nb[t] if parent.get(s) == t]
        chains = [morph(built[s], td.bags[s], bag) for s in sorted(kids)]
        if not chains:
            chains = [morph(add(LEAF, (), []), frozenset(), bag)]
        idx = chains[0]
        for other in chains[1:]:
            idx = add(JOIN, bag, [idx, other])
        built[t] = idx
    r = morph(built[root], td.bags[root], frozenset())
    return NiceTreeDecomposition(nodes, r)


def check_nice(ntd: NiceTreeDecomposition, adj: dict[int, set[int]]) -> Optional[str]:
    for a, nd in enumerate(ntd.nodes):
        kids = [ntd.nodes[c] for c in nd.children]
        if any(c >= a for c in nd.children):
            return f"node {a} precedes a child"
        bag = set(nd.bag)
        if nd.kind == LEAF:
            if kids or bag:
                return f"leaf {a} is not an empty childless bag"
        elif nd.kind == INTRODUCE:
            if len(kids) != 1 or nd.vertex in kids[0].bag or set(kids[0].bag) | {nd.vertex} != bag:
                return f"introduce node {a} is malformed"
        elif nd.kind == FORGET:
            if len(kids) != 1 or nd.vertex not in kids[0].bag or set(kids[0].bag) - {nd.vertex} != bag:
                return f"forget node {a} is malformed"
        elif nd.kind == JOIN:
            if len(kids) != 2 or any(set(k.bag) != bag for k in kids):
                return f"join node {a} is malformed"
        else:
            return f"unknown kind {nd.kind!r}"
    if ntd.nodes[ntd.root].bag:
        return "root bag is not empty"
    bags = {a: frozenset(nd.bag) for a, nd in enumerate(ntd.nodes)}
    tree = tuple((c, a) for a, nd in enumerate(ntd.nodes) for c in nd.children)
    return check_decomposition(TreeDecomposition(bags, tree), adj)


class StateLimitError(RuntimeError):
    """The decomposition is too wide for the DP table guard."""


@dataclass
class DpStats:
    """Instrumentation for :func:`tw_dp_solve`.

    With ``audit`` set, every table entry is expanded into the partial
    matchings its back-pointers describe, and its counter and cost are
    recomputed from those edge sets.  At join entries the identity
    ``|A1 & A2| + |B1 & B2| = |E1 & E2| + |I|`` is checked on the child edge
    sets ``A``, ``B``, their union ``E`` and the common bag pairs ``I``.
    """

    audit: bool = False
    join_combinations: int = 0
    join_identity_checked: int = 0
    join_identity_failures: list = field(default_factory=list)
    witness_checks: int = 0
    witness_failures: list = field(default_factory=list)
    states: int = 0


def _options(bag, s, v, c_of) -> list[tuple[int, Cost]]:
    """Codes for a newly introduced ``v``: await, or pair with an awaiting bag vertex."""
    out = [(AWAIT, 0)]
    for p, w in enumerate(bag):
        if s[p] == AWAIT:
            c = c_of(v, w)
            if c != INF:
                out.append((w, c))
    return out


def tw_dp_solve(inst: Instance, ntd: Optional[NiceTreeDecomposition] = None, max_bag: int = 12,
                prune: bool = True, stats: Optional[DpStats] = None) -> Optional[SolutionPair]:
    """Exact optimum by DP over ``ntd`` (:func:`best_decomposition` by default).

    With ``stats`` given, the counter and cost of every entry on the witness
    path are recomputed from its edge sets; ``stats.audit`` extends this to
    every table entry and to the join identity.
    """
    n, k = inst.n, inst.k
    if ntd is None:
        ntd = make_nice(best_decomposition(inst))
    if ntd.width + 1 > max_bag:
        raise StateLimitError(f"bag size {ntd.width + 1} exceeds guard {max_bag}")

    def edge(x, y):
        return (x + 1, y - n + 1) if x < y else (y + 1, x - n + 1)

    def c1(x, y):
        if (x < n) == (y < n):
            return INF
        return inst.c1(edge(x, y))

    def c2(x, y):
        if (x < n) == (y < n):
            return INF
        return inst.c2(edge(x, y))

    def common_pairs(bag, s1, s2) -> int:
        return sum(1 for p, x in enumerate(bag) if s1[p] >= 0 and s1[p] == s2[p] and x < s1[p])

    # table: (s1, s2) -> {count: (cost, backpointer)}
    tables: list[Optional[dict]] = [None] * len(ntd.nodes)

    def put(tab, key, cnt, cost, bp):
        row = tab.setdefault(key, {})
        cur = row.get(cnt)
        if cur is None or cost < cur[0]:
            row[cnt] = (cost, bp)

    def dominate(tab):
        for key, row in tab.items():
            keep = {}
            best = INF
            for cnt in sorted(row, reverse=True):
                if row[cnt][0] < best:
                    keep[cnt] = row[cnt]
                    best = row[cnt][0]
            tab[key] = keep

    for a, nd in enumerate(ntd.nodes):
        tab: dict = {}
        bag = nd.bag
        if nd.kind == LEAF:
            tab[((), ())] = {0: (0, None)}
        elif nd.kind == INTRODUCE:
            child = ntd.nodes[nd.children[0]]
            v = nd.vertex
            pos = bag.index(v)
            cpos = {x: p for p, x in enumerate(child.bag)}
            for (s1, s2), row in tables[nd.children[0]].items():
                o1 = _options(child.bag, s1, v, c1)
                o2 = _options(child.bag, s2, v, c2)
                cap = k + common_pairs(child.bag, s1, s2) + 1
                for w1, x1 in o1:
                    n1 = list(s1)
                    if w1 >= 0:
                        n1[cpos[w1]] = v
                    n1.insert(pos, w1)
                    for w2, x2 in o2:
                        n2 = list(s2)
                        if w2 >= 0:
                            n2[cpos[w2]] = v
                        n2.insert(pos, w2)
                        bump = 1 if w1 >= 0 and w1 == w2 else 0
                        key = (tuple(n1), tuple(n2))
                        for cnt, (cost, _) in row.items():
                            put(tab, key, min(cap, cnt + bump), cost + x1 + x2,
                                ((s1, s2), cnt, v, w1, w2))
        elif nd.kind == FORGET:
            child = ntd.nodes[nd.children[0]]
            v = nd.vertex
            p = child.bag.index(v)
            for (s1, s2), row in tables[nd.children[0]].items():
                if s1[p] == AWAIT or s2[p] == AWAIT:
                    continue
                n1, n2 = list(s1), list(s2)
                for s, ns in ((s1, n1), (s2, n2)):
                    if s[p] >= 0:
                        ns[child.bag.index(s[p])] = DONE
                del n1[p], n2[p]
                key = (tuple(n1), tuple(n2))
                cap = k + common_pairs(bag, key[0], key[1])
                for cnt, (cost, _) in row.items():
                    put(tab, key, min(cap, cnt), cost, ((s1, s2), cnt))
        else:
            ta, tb = tables[nd.children[0]], tables[nd.children[1]]
            groups: dict = {}
            for key in tb:
                groups.setdefault(_pair_pattern(key), []).append(key)
            for ka, rowa in ta.items():
                for kb in groups.get(_pair_pattern(ka), ()):
                    merged = _merge(ka, kb)
                    if merged is None:
                        continue
                    s1, s2 = merged
                    inter = common_pairs(bag, s1, s2)
                    cap = k + inter
                    shared = sum(c1(x, s1[p]) for p, x in enumerate(bag) if s1[p] > x) \
                        + sum(c2(x, s2[p]) for p, x in enumerate(bag) if s2[p] > x)
                    rowb = tb[kb]
                    for cnta, (costa, _) in rowa.items():
                        for cntb, (costb, _) in rowb.items():
                            raw = cnta + cntb - inter
                            cnt = min(cap, raw)
                            if stats is not None:
                                stats.join_combinations += 1
                            put(tab, merged, cnt, costa + costb - shared, (ka, cnta, kb, cntb))
        if prune:
            dominate(tab)
        tables[a] = tab
        if stats is not None:
            stats.states += sum(len(r) for r in tab.values())
    if stats is not None and stats.audit:
        _audit(ntd, tables, k, stats, c1, c2)
    root = tables[ntd.root].get(((), ()), {})
    if k not in root:
        return None
    m1, m2 = _reconstruct(ntd, tables, k, n, stats, c1, c2)
    pair = SolutionPair.build(inst, m1, m2)
    if pair.cost != root[k][0]:
        raise AssertionError(f"witness cost {pair.cost} differs from table value {root[k][0]}")
    return pair


def _pair_pattern(key):
    return tuple(tuple(c if c >= 0 else AWAIT for c in s) for s in key)


def _merge(ka, kb):
    out = []
    for sa, sb in zip(ka, kb):
        s = []
        for x, y in zip(sa, sb):
            if x >= 0:
                s.append(x)  # pattern grouping guarantees y == x
            elif x == DONE and y == DONE:
                return None
            elif x == DONE or y == DONE:
                s.append(DONE)
            else:
                s.append(AWAIT)
        out.append(tuple(s))
    return tuple(out)


def _children(nd, bp) -> list:
    if nd.kind in (INTRODUCE, FORGET):
        return [(nd.children[0], bp[0], bp[1])]
    if nd.kind == JOIN:
        return [(nd.children[0], bp[0], bp[1]), (nd.children[1], bp[2], bp[3])]
    return []


def _edge_sets(ntd, tables, start, memo: dict) -> tuple:
    """Partial M1/M2 edge sets behind table entry ``start = (node, key, cnt)``, memoized."""
    stack = [(start, False)]
    while stack:
        sid, done = stack.pop()
        if sid in memo:
            continue
        a, key, cnt = sid
        nd = ntd.nodes[a]
        bp = tables[a][key][cnt][1]
        kids = _children(nd, bp)
        if not done:
            stack.append((sid, True))
            stack.extend((c, False) for c in kids if c not in memo)
            continue
        if nd.kind == LEAF:
            e1, e2 = frozenset(), frozenset()
        elif nd.kind == INTRODUCE:
            e1, e2 = memo[kids[0]]
            _, _, v, w1, w2 = bp
            if w1 >= 0:
                e1 = e1 | {(min(v, w1), max(v, w1))}
            if w2 >= 0:
                e2 = e2 | {(min(v, w2), max(v, w2))}
        elif nd.kind == FORGET:
            e1, e2 = memo[kids[0]]
        else:
            a1, a2 = memo[kids[0]]
            b1, b2 = memo[kids[1]]
            e1, e2 = a1 | b1, a2 | b2
        memo[sid] = (e1, e2)
    return memo[start]


def _bag_common(bag, key) -> int:
    return sum(1 for p, x in enumerate(bag) if key[0][p] >= 0 and key[0][p] == key[1][p] and x < key[0][p])


def _entry_failure(ntd, tables, sid, memo, k, c1, c2) -> Optional[tuple]:
    """Recompute counter and cost of one entry from its edge sets; ``None`` if consistent."""
    a, key, cnt = sid
    nd = ntd.nodes[a]
    cost, bp = tables[a][key][cnt]
    e1, e2 = _edge_sets(ntd, tables, sid, memo)
    true_cnt = min(k + _bag_common(nd.bag, key), len(e1 & e2))
    true_cost = sum(c1(x, y) for x, y in e1) + sum(c2(x, y) for x, y in e2)
    if true_cnt != cnt or true_cost != cost:
        return (a, cnt, true_cnt, cost, true_cost)
    return None


def _audit(ntd, tables, k, stats, c1, c2) -> None:
    memo: dict = {}
    for a, nd in enumerate(ntd.nodes):
        for key, row in tables[a].items():
            for cnt in row:
                sid = (a, key, cnt)
                stats.witness_checks += 1
                bad = _entry_failure(ntd, tables, sid, memo, k, c1, c2)
                if bad:
                    stats.witness_failures.append(bad)
                if nd.kind != JOIN:
                    continue
                (a1, a2), (b1, b2) = (memo[c] for c in _children(nd, row[cnt][1]))
                e1, e2 = memo[sid]
                inter = _bag_common(nd.bag, key)
                stats.join_identity_checked += 1
                if len(a1 & a2) + len(b1 & b2) != len(e1 & e2) + inter:
                    stats.join_identity_failures.append((a, len(a1 & a2), len(b1 & b2), len(e1 & e2), inter))


def _reconstruct(ntd, tables, k, n, stats, c1, c2):
    """Follow back-pointers from the root; optionally re-verify every visited entry."""
    memo: dict = {}
    root = (ntd.root, ((), ()), k)
    e1, e2 = _edge_sets(ntd, tables, root, memo)
    if stats is not None and not stats.audit:
        for sid in memo:
            stats.witness_checks += 1
            bad = _entry_failure(ntd, tables, sid, memo, k, c1, c2)
            if bad:
                stats.witness_failures.append(bad)
    to_pairs = lambda es: [(x + 1, y - n + 1) for x, y in es]
    return to_pairs(e1), to_pairs(e2)


def decomposition_from_text(text: str, n: int) -> TreeDecomposition:
    bags, tree = {}, []
    header = False
    for ln, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            if parts[0] == "td":
                header = True
            elif parts[0] == "b":
                bid = int(parts[1])
                if bid in bags:
                    raise InstanceError(f"line {ln}: duplicate bag {bid}")
                bags[bid] = frozenset(parse_vname(s, n) for s in parts[2:])
            elif parts[0] == "t":
                tree.append((int(parts[1]), int(parts[2])))
            else:
                raise InstanceError(f"line {ln}: unknown record {parts[0]!r}")
        except (IndexError, ValueError) as exc:
            raise InstanceError(f"line {ln}: {exc}") from None
    if not header:
        raise InstanceError("missing 'td' header")
    for a, b in tree:
        if a not in bags or b not in bags:
            raise InstanceError(f"tree edge ({a},{b}) names an unknown bag")
    return TreeDecomposition(bags, tuple(tree))


def decomposition_to_text(td: TreeDecomposition, n: int) -> str:
    lines = [f"td {td.width}"]
    for bid in sorted(td.bags):
        lines.append(" ".join(["b", str(bid)] + [vname(x, n) for x in sorted(td.bags[bid])]))
    for a, b in td.tree:
        lines.append(f"t {a} {b}")
    return "\n".join(lines) + "\n"
