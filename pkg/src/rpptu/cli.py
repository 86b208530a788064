"""Command-line entry point: solve, gen, verify and bench."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_GAP = 2
EXIT_USAGE = 64

LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG, "trace": 5}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    name = os.environ.get("RPPTU_LOG", "error").lower()
    logging.addLevelName(5, "TRACE")
    logging.basicConfig(level=LOG_LEVELS.get(name, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cmd_solve(args) -> int:
    from .bnc import BranchAndCut, SolveConfig
    from .graph import load_instance
    from .replicated import to_dot
    from .spatial import assemble
    from .temporal import gantt

    inst = load_instance(args.instance)
    cut_log = []

    def on_cut(cut):
        cut_log.append(cut)
        if args.log_cuts:
            sys.stderr.write(json.dumps(cut.to_dict(solver.rg), sort_keys=True) + "\n")

    cfg = SolveConfig(use_cuts=not args.no_cuts, node_budget=args.node_budget,
                      time_budget=args.time_budget, lp_engine=args.lp_engine, on_cut=on_cut)
    solver = BranchAndCut(inst, cfg)
    if args.dump_replicated:
        _write(to_dot(solver.rg), args.dump_replicated)
    if args.dump_lp:
        _write(assemble(solver.rg).to_lp_text(), args.dump_lp)
    res = solver.solve()
    out = res.to_dict(inst)
    out["instance"] = inst.name
    _write(_dumps(out), args.output)
    if args.gantt and res.trajectory is not None:
        sys.stderr.write(gantt(res.trajectory, inst) + "\n")
    if res.status == "optimal":
        return EXIT_OK
    if res.status == "gap":
        return EXIT_GAP
    return EXIT_ERROR


def _cmd_gen(args) -> int:
    from .generator import GenConfig, generate
    from .graph import dumps_instance

    cfg = GenConfig(num_vertices=args.vertices, arc_ratio=args.ratio, beta=args.beta,
                    num_agents=args.agents, seed=args.seed, window_model=args.windows)
    _write(dumps_instance(generate(cfg)), args.output)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .bnc import BranchAndCut, SolveConfig
    from .graph import load_instance
    from .lp import LpStatus, solve_lp
    from .polyhedra import (affine_dimension, construct_lemma1_family, enumerate_cgf_points,
                            equality_rank, family_affine_rank, verify_facet)
    from .replicated import build
    from .separation import check_cut_validity, find_cuts, side_conditions
    from .spatial import assemble

    inst = load_instance(args.instance)
    rg = build(inst)
    report = {"instance": inst.name, "arcs": rg.num_arcs, "vertices": rg.num_vertices}
    ok = True

    rank = equality_rank(rg)
    report["equality_rank"] = {"expected": rg.num_vertices, "computed": rank}
    ok &= rank == rg.num_vertices

    cloud = enumerate_cgf_points(rg, cap=args.cap)
    expected = rg.num_arcs - rg.num_vertices
    dim = affine_dimension(cloud)
    report["dimension"] = {"expected": expected, "computed": dim}
    ok &= dim == expected
    if inst.num_agents >= 2:
        fam = construct_lemma1_family(rg)
        frank = family_affine_rank(fam)
        report["family"] = {"solutions": len(fam), "affine_rank": frank}
        ok &= frank == len(fam) - 1

    # cuts met at the root and during a short search
    found = []
    res = solve_lp(assemble(rg))
    if res.status == LpStatus.OPTIMAL:
        found += find_cuts(rg, res.x, check_side_conditions=False)
    seen = {c.signature for c in found}

    def on_cut(c):
        if c.signature not in seen:
            seen.add(c.signature)
            found.append(c)

    BranchAndCut(inst, SolveConfig(node_budget=args.node_budget, on_cut=on_cut)).solve()
    cuts = []
    for c in found:
        valid, _ = check_cut_validity(rg, c, cloud=cloud)
        side, reason = side_conditions(rg, c)
        entry = c.to_dict(rg)
        entry.update({"valid": valid, "side_conditions": side, "side_reason": reason})
        if side:
            fr = verify_facet(rg, c, cloud, dim)
            entry.update({"facet": fr.facet, "tight_dim": fr.tight_dim, "dim": fr.dim})
            ok &= fr.facet
        ok &= valid
        cuts.append(entry)
    report["cuts"] = cuts
    report["pass"] = bool(ok)
    _write(_dumps(report), args.output)
    return EXIT_OK if ok else EXIT_ERROR


def _parse_cells(spec: str):
    """``V:ratio:beta[:agents]`` items separated by commas."""
    cells = []
    for item in spec.split(","):
        parts = item.strip().split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"bad cell {item!r}; expected V:ratio:beta[:agents]")
        v, r, b = int(parts[0]), float(parts[1]), float(parts[2])
        k = int(parts[3]) if len(parts) == 4 else 1
        cells.append((v, r, b, k))
    return cells


def _cmd_bench(args) -> int:
    from .bnc import SolveConfig
    from .generator import GenConfig, batch_csv, run_batch

    try:
        cells = _parse_cells(args.cells)
    except ValueError as exc:
        sys.stderr.write(f"rpptu bench: {exc}\n")
        return EXIT_USAGE
    cfgs = [GenConfig(num_vertices=v, arc_ratio=r, beta=b, num_agents=k, window_model=args.windows)
            for v, r, b, k in cells]
    sc = SolveConfig(node_budget=args.node_budget, time_budget=args.time_budget, lp_engine=args.lp_engine)
    rows = run_batch(cfgs, args.count, sc, base_seed=args.seed)
    _write(batch_csv(rows), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rpptu", description="Multi-agent rural postman routing with arc unavailability windows.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("instance")
    s.add_argument("--no-cuts", action="store_true")
    s.add_argument("--node-budget", type=int, default=1000)
    s.add_argument("--time-budget", type=float, default=None, help="wall seconds")
    s.add_argument("--lp-engine", choices=("simplex", "highs"), default="simplex",
                   help="built-in simplex or SciPy's HiGHS")
    s.add_argument("--gantt", action="store_true", help="print a text timeline to stderr")
    s.add_argument("--dump-lp", metavar="PATH", help="write the root LP in LP text format")
    s.add_argument("--dump-replicated", metavar="PATH", help="write the replicated graph as DOT")
    s.add_argument("--log-cuts", action="store_true", help="stream cuts as JSON lines on stderr")
    s.add_argument("--seed", type=int, default=0, help="accepted for uniformity; the solver is deterministic")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=_cmd_solve)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--vertices", type=int, default=20)
    g.add_argument("--ratio", type=float, default=1.2)
    g.add_argument("--beta", type=float, default=0.3)
    g.add_argument("--agents", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--windows", choices=("train", "random", "none"), default="train")
    g.add_argument("-o", "--output", default=None)
    g.set_defaults(func=_cmd_gen)

    v = sub.add_parser("verify", help="dimension, rank and cut checks on a small instance")
    v.add_argument("instance")
    v.add_argument("--cap", type=int, default=2, help="arc multiplicity cap for enumeration")
    v.add_argument("--node-budget", type=int, default=50)
    v.add_argument("-o", "--output", default=None)
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="with/without cuts batch statistics as CSV")
    b.add_argument("--cells", required=True, help="comma list of V:ratio:beta[:agents]")
    b.add_argument("--count", type=int, default=30)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--windows", choices=("train", "random", "none"), default="train")
    b.add_argument("--node-budget", type=int, default=1000)
    b.add_argument("--time-budget", type=float, default=None)
    b.add_argument("--lp-engine", choices=("simplex", "highs"), default="simplex")
    b.add_argument("-o", "--output", default=None)
    b.set_defaults(func=_cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    _setup_logging()
    try:
        return args.func(args)
    except Exception as exc:  # reported, not re-raised, so exit codes stay stable
        logging.getLogger("rpptu").debug("failure", exc_info=True)
        sys.stderr.write(f"rpptu {args.command}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
