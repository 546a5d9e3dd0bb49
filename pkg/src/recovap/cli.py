"""Command-line interface.

Every command prints line-delimited JSON records with the fields
``algorithm``, ``cost``, ``intersection``, ``wall_time``, ``seed`` and
``status``.  Exit codes: 0 success, 1 usage or parse error, 2 infeasible,
3 precondition of the chosen algorithm violated, 4 verification failure or
solver disagreement.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Optional

from . import io
from .core import INF, Instance, InstanceError, validate_solution
from .gadgets import (decode_certificate, encode_certificate, grid_tiling_to_recovap,
                      grid_tiling_to_recovap_dual, random_grid_tiling, solve_grid_tiling)
from .generators import monge_pair, random_exact_instance, random_instance
from .monge import CostMatrixPair, PreconditionError, monge_violation, solve_monge_antimonge
from .oracle import OracleLimitError, brute_force_recovap, milp_recovap, oracle_limit
from .second_stage import (DEFAULT_MAX_N, BudgetError, preprocess_degree_one, reduce_2s_to_exact,
                           reduce_exact_to_matching_red, reduce_exactred_to_2s, solve_2s)
from .treewidth import StateLimitError, decomposition_from_text, graph_of, make_nice, tw_dp_solve
from .xp import xp_solve_k, xp_solve_kprime

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_PRECONDITION, EXIT_MISMATCH = 0, 1, 2, 3, 4

# errors meaning "this algorithm cannot run on this input"
_PRECONDITION = (PreconditionError, OracleLimitError, StateLimitError, BudgetError)


class UsageError(Exception):
    pass


def _json_cost(c):
    return None if c is None or c == INF else c


def record(algorithm: str, cost=None, intersection=None, wall_time: float = 0.0, seed=None,
           status: str = "ok", **extra) -> dict:
    rec = {"algorithm": algorithm, "cost": _json_cost(cost), "intersection": intersection,
           "wall_time": round(wall_time, 6), "seed": seed, "status": status}
    rec.update(extra)
    return rec


def emit(rec: dict, out=None) -> None:
    print(json.dumps(rec, sort_keys=False), file=out or sys.stdout)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = random.SystemRandom().randrange(2 ** 31)
    print(f"# seed {seed}", file=sys.stderr)
    return seed


# --- solvers -----------------------------------------------------------------------

def _solve_monge(inst: Instance):
    return solve_monge_antimonge(CostMatrixPair.from_instance(inst))[0]


def _solve_twdp(inst: Instance, td_text: Optional[str] = None):
    if td_text is None:
        return tw_dp_solve(inst)
    td = decomposition_from_text(td_text, inst.n)
    return tw_dp_solve(inst, make_nice(td, graph_of(inst)))


SOLVERS: dict[str, Callable] = {
    "oracle": brute_force_recovap,
    "monge": _solve_monge,
    "xp-k": xp_solve_k,
    "xp-kprime": xp_solve_kprime,
    "twdp": _solve_twdp,
}


def applicable(inst: Instance) -> list[str]:
    """Algorithms expected to run on ``inst`` within their guards."""
    algos = ["xp-k", "xp-kprime", "twdp"]
    if inst.n <= oracle_limit():
        algos.insert(0, "oracle")
    if inst.is_complete():
        a, b = inst.matrix(1), inst.matrix(2)
        if monge_violation(a) is None and monge_violation(b, anti=True) is None:
            algos.append("monge")
    return algos


def run_solver(algo: str, inst: Instance, td_text: Optional[str] = None) -> tuple[dict, object]:
    """Run one solver; returns its record and the validated pair (``None`` unless status is ok)."""
    t0 = time.perf_counter()
    try:
        pair = _solve_twdp(inst, td_text) if algo == "twdp" else SOLVERS[algo](inst)
    except _PRECONDITION as exc:
        extra = {"quadruple": list(exc.quadruple)} if getattr(exc, "quadruple", None) else {}
        return record(algo, wall_time=time.perf_counter() - t0, status="precondition",
                      error=str(exc), **extra), None
    dt = time.perf_counter() - t0
    if pair is None:
        return record(algo, wall_time=dt, status="infeasible"), None
    rep = validate_solution(inst, pair)
    if not rep.feasible:
        return record(algo, pair.cost, pair.intersection, dt, status="invalid", error=rep.violation), None
    return record(algo, rep.cost, rep.intersection, dt), pair


def cmd_solve(args) -> int:
    inst = io.parse_instance(_read(args.instance))
    if args.k is not None:
        inst = inst.with_k(args.k)
    td_text = _read(args.td) if args.td else None
    if args.td and args.algo != "twdp":
        raise UsageError("--td only applies to --algo twdp")
    rec, pair = run_solver(args.algo, inst, td_text)
    if rec["status"] == "precondition":
        print(f"precondition failed: {rec['error']}", file=sys.stderr)
        emit(rec)
        return EXIT_PRECONDITION
    if pair is None:
        sys.stdout.write(io.dump_solution(INF))
        emit(rec)
        return EXIT_INFEASIBLE
    sys.stdout.write(io.dump_pair(pair))
    emit(rec)
    return EXIT_OK


def cmd_solve_2s(args) -> int:
    inst = io.parse_instance(_read(args.instance))
    if args.k is not None:
        inst = inst.with_k(args.k)
    m1 = io.parse_matching(_read(args.m1), inst.n)
    seed = _seed(args)
    t0 = time.perf_counter()
    try:
        res = solve_2s(inst, m1, trials=args.trials, seed=seed, max_n=args.max_n)
    except BudgetError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        emit(record("solve-2s", seed=seed, status="precondition", error=str(exc)))
        return EXIT_PRECONDITION
    dt = time.perf_counter() - t0
    if not res.feasible:
        sys.stdout.write(io.dump_solution(INF))
        emit(record("solve-2s", wall_time=dt, seed=seed, status="infeasible",
                    trials=res.trials, error_bound=res.error_bound))
        return EXIT_INFEASIBLE
    sys.stdout.write(io.dump_solution(res.cost, None, res.matching))
    emit(record("solve-2s", res.cost, len(res.matching & m1), dt, seed,
                trials=res.trials, error_bound=res.error_bound))
    return EXIT_OK


# --- generators ----------------------------------------------------------------------

def cmd_gen(args) -> int:
    seed = _seed(args)
    if args.kind == "monge":
        if args.n < 1 or not 0 <= args.k <= args.n:
            raise UsageError("need n >= 1 and 0 <= k <= n")
        inst = monge_pair(args.n, args.k, seed).instance()
        text = io.dump_instance(inst, [f"gen monge n={args.n} k={args.k} seed={seed}"])
    elif args.kind == "random":
        if args.n < 1 or not 0 <= args.k <= args.n or not 0 <= args.density <= 1:
            raise UsageError("need n >= 1, 0 <= k <= n and density in [0, 1]")
        inst = random_instance(args.n, args.density, seed, args.k)
        text = io.dump_instance(inst, [f"gen random n={args.n} density={args.density} k={args.k} seed={seed}"])
    elif args.kind == "exact":
        if args.n < 1 or not 0 <= args.density <= 1:
            raise UsageError("need n >= 1 and density in [0, 1]")
        g = random_exact_instance(args.n, args.density, seed)
        text = io.dump_exact(g, [f"gen exact n={args.n} density={args.density} seed={seed}"])
    else:
        if args.ell < 1 or args.n < 1 or not 0 <= args.density <= 1:
            raise UsageError("need ell >= 1, n >= 1 and density in [0, 1]")
        gt = random_grid_tiling(args.ell, args.n, seed, args.density)
        text = io.dump_grid_tiling(gt, [f"gen gt ell={args.ell} n={args.n} density={args.density} seed={seed}"])
    _write(text, args.output)
    return EXIT_OK


# --- reductions ---------------------------------------------------------------------

def cmd_reduce(args) -> int:
    text = _read(args.input)
    if args.kind == "exact-to-2s":
        g = io.parse_exact(text)
        pre = preprocess_degree_one(g)
        if pre is None:
            print("source instance is infeasible (forced edges conflict)", file=sys.stderr)
            return EXIT_INFEASIBLE
        red = reduce_exact_to_matching_red(pre.instance)
        inst, m1 = reduce_exactred_to_2s(red.instance)
        out = io.dump_instance(inst, ["2S instance; the first-stage matching follows as m1 lines",
                                      f"source forced edges: {len(pre.forced)}"])
        out += "".join(f"m1 {i} {j}\n" for i, j in sorted(m1))
    elif args.kind == "2s-to-exact":
        inst = io.parse_instance(text)
        m1 = io.parse_matching(_read(args.m1) if args.m1 else text, inst.n)
        g, shift = reduce_2s_to_exact(inst, m1)
        out = io.dump_exact(g, [f"red edges are M1; costs are c2 minus {shift}"])
    else:
        gt = io.parse_grid_tiling(text)
        gad = (grid_tiling_to_recovap_dual if args.dual else grid_tiling_to_recovap)(gt, complete=args.complete)
        out = io.dump_instance(gad.instance, [
            f"grid tiling reduction ({'parameter n-k' if args.dual else 'parameter k'})",
            f"target cost 0, k={gad.target_k}, n-k={gad.kprime}"])
    _write(out, args.output)
    return EXIT_OK


def _gt_roundtrip(gt, dual: bool, oracle: bool) -> dict:
    t0 = time.perf_counter()
    gad = (grid_tiling_to_recovap_dual if dual else grid_tiling_to_recovap)(gt)
    sol = solve_grid_tiling(gt)
    name = "gt-roundtrip-dual" if dual else "gt-roundtrip"
    rec = dict(n=gad.instance.n, k=gad.target_k, solvable=sol is not None)
    if sol is not None:
        pair = encode_certificate(gad, sol)
        if decode_certificate(gad, pair) != tuple(sol):
            return record(name, status="mismatch", error="decode(encode(w)) != w", **rec)
    if oracle:
        z = milp_recovap(gad.instance, zero_cost_only=True)
        found = z is not None and validate_solution(gad.instance, z).cost == 0
        if found != (sol is not None):
            return record(name, status="mismatch", error="oracle disagrees with grid tiling", **rec)
        if found:
            r, c = decode_certificate(gad, z)
            if not gt.satisfied_by(r, c):
                return record(name, status="mismatch", error="decoded oracle pair violates a cell", **rec)
    else:
        rec["soundness"] = "skipped"
    return record(name, 0 if sol is not None else None, gad.target_k if sol else None,
                  time.perf_counter() - t0, **rec)


def cmd_verify(args) -> int:
    gt = io.parse_grid_tiling(_read(args.input))
    variants = (False, True) if args.both else (args.dual,)
    code = EXIT_OK
    for dual in variants:
        rec = _gt_roundtrip(gt, dual, not args.no_oracle)
        emit(rec)
        if rec["status"] != "ok":
            code = EXIT_MISMATCH
    return code


# --- benchmark ----------------------------------------------------------------------

def _bench_one(path: str, algos: Optional[list]) -> list[dict]:
    inst = io.parse_instance(Path(path).read_text())
    out = []
    for algo in algos or applicable(inst):
        rec, _ = run_solver(algo, inst)
        rec["instance"] = Path(path).name
        out.append(rec)
    return out


def _disagrees(inst: Instance, algos: list) -> bool:
    costs = set()
    for algo in algos:
        rec, _ = run_solver(algo, inst)
        if rec["status"] in ("ok", "infeasible"):
            costs.add(rec["cost"])
        elif rec["status"] == "invalid":
            return True
    return len(costs) > 1


def minimize_repro(inst: Instance, algos: list) -> Instance:
    """Greedily drop edges while the algorithms keep disagreeing."""
    cur = inst
    changed = True
    while changed:
        changed = False
        for e in sorted(cur.costs):
            costs = {x: c for x, c in cur.costs.items() if x != e}
            cand = Instance(cur.n, costs, cur.k)
            if _disagrees(cand, algos):
                cur, changed = cand, True
                break
    return cur


def cmd_bench(args) -> int:
    d = Path(args.directory)
    if not d.is_dir():
        raise UsageError(f"{d} is not a directory")
    files = sorted(str(p) for p in d.iterdir() if p.suffix in (".rap", ".txt") and p.is_file())
    if not files:
        raise UsageError(f"no instance files (*.rap) in {d}")
    algos = args.algos.split(",") if args.algos else None
    if algos:
        bad = [a for a in algos if a not in SOLVERS]
        if bad:
            raise UsageError(f"unknown algorithm(s): {', '.join(bad)}")
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as pool:
            results = list(pool.map(_bench_one, files, [algos] * len(files)))
    else:
        results = [_bench_one(f, algos) for f in files]
    disagreements = 0
    rows = []
    for path, recs in zip(files, results):
        for rec in recs:
            emit(rec)
        costs = {r["cost"] for r in recs if r["status"] in ("ok", "infeasible")}
        timed = [r for r in recs if r["status"] in ("ok", "infeasible")]
        fastest = min(timed, key=lambda r: r["wall_time"])["algorithm"] if timed else "-"
        rows.append((Path(path).name, fastest, recs))
        if len(costs) > 1 or any(r["status"] == "invalid" for r in recs):
            disagreements += 1
            inst = io.parse_instance(Path(path).read_text())
            used = [r["algorithm"] for r in recs if r["status"] != "precondition"]
            small = minimize_repro(inst, used)
            repro = io.dump_instance(small, [f"repro for {Path(path).name}: {', '.join(used)} disagree"])
            if args.repro_dir:
                Path(args.repro_dir).mkdir(parents=True, exist_ok=True)
                Path(args.repro_dir, f"repro_{Path(path).stem}.rap").write_text(repro)
            sys.stderr.write(repro)
    _print_table(rows)
    emit({"summary": True, "instances": len(files), "disagreements": disagreements})
    return EXIT_MISMATCH if disagreements else EXIT_OK


def _print_table(rows) -> None:
    algos = sorted({r["algorithm"] for _, _, recs in rows for r in recs})
    head = ["instance"] + algos + ["fastest"]
    lines = [head]
    for name, fastest, recs in rows:
        by = {r["algorithm"]: r for r in recs}
        cells = []
        for a in algos:
            r = by.get(a)
            if r is None or r["status"] == "precondition":
                cells.append("-")
            else:
                c = "inf" if r["cost"] is None else str(r["cost"])
                cells.append(f"{c} ({r['wall_time'] * 1000:.1f}ms)")
        lines.append([name] + cells + [fastest])
    widths = [max(len(row[c]) for row in lines) for c in range(len(head))]
    for row in lines:
        print("  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip(), file=sys.stderr)


# --- entry point -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="recovap", description="Recoverable assignment problem solvers.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a RecovAP instance")
    s.add_argument("instance")
    s.add_argument("--algo", choices=sorted(SOLVERS), default="oracle")
    s.add_argument("--td", help="tree decomposition file for --algo twdp")
    s.add_argument("--k", type=int, help="override the intersection bound")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("solve-2s", help="second stage with a fixed first-stage matching")
    s.add_argument("instance")
    s.add_argument("--m1", required=True, help="file with 'm1 i j' (or 'i j') lines")
    s.add_argument("--trials", type=int, default=40)
    s.add_argument("--seed", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--max-n", type=int, default=DEFAULT_MAX_N, help="size guard for exact determinants")
    s.set_defaults(func=cmd_solve_2s)

    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("kind", choices=["monge", "random", "exact", "gt"])
    g.add_argument("--n", type=int, required=True, help="size, or value range for gt")
    g.add_argument("--k", type=int, default=0)
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--ell", type=int, default=2)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", help="apply a reduction")
    r.add_argument("kind", choices=["exact-to-2s", "2s-to-exact", "gt-to-recovap"])
    r.add_argument("input")
    r.add_argument("--m1", help="first-stage matching for 2s-to-exact (default: m1 lines of the input)")
    r.add_argument("--dual", action="store_true", help="gt-to-recovap for the parameter n-k")
    r.add_argument("--complete", action="store_true", help="add (1,1) edges to make the graph complete")
    r.add_argument("-o", "--output")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify", help="check reductions on an input")
    v.add_argument("kind", choices=["gt-roundtrip"])
    v.add_argument("input")
    v.add_argument("--dual", action="store_true")
    v.add_argument("--both", action="store_true", help="check both gadget variants")
    v.add_argument("--no-oracle", action="store_true", help="only the encode/decode direction")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run all applicable solvers on a directory of instances")
    b.add_argument("directory")
    b.add_argument("--algos", help="comma-separated subset of solvers")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--repro-dir", help="where to write minimized disagreement cases")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, InstanceError) as exc:
        if isinstance(exc, _PRECONDITION):
            print(f"precondition failed: {exc}", file=sys.stderr)
            return EXIT_PRECONDITION
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _PRECONDITION as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
