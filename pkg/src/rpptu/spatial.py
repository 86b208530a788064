"""Spatial relaxation of a search node over the replicated graph.

Columns are the replicated arcs followed by one makespan-estimate column.
Rows: flow balance per vertex, one unit leaving each agent source, each
service arc covered by exactly one of its copies (at least one in the relaxed
multi-visit mode), a per-agent makespan estimate, and any accumulated cuts.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .lp import LpProblem, LpRow
from .replicated import ArcKind, ReplicatedGraph


class InconsistentNode(ValueError):
    pass


def _walk_degree_check(rg: ReplicatedGraph, fixed_one, fixed_zero) -> None:
    if set(fixed_one) & set(fixed_zero):
        raise InconsistentNode("an arc is fixed to both 0 and 1")
    fixed = set(fixed_one) | set(fixed_zero)
    ones = set(fixed_one)
    for v in range(rg.num_vertices):
        ins, outs = rg.in_arcs[v], rg.out_arcs[v]
        if all(a in fixed for a in ins) and all(a in fixed for a in outs):
            if sum(a in ones for a in ins) != sum(a in ones for a in outs):
                raise InconsistentNode(f"forced arcs unbalance vertex {rg.vertex_label(v)}")


def assemble(
    rg: ReplicatedGraph,
    node=None,
    cuts: Iterable = (),
    *,
    per_agent_estimate: bool = True,
    relaxed: bool = False,
    cap: float = 1.0,
) -> LpProblem:
    """Build the node LP.

    ``node`` needs ``fixed_one``, ``fixed_zero`` (arc id collections) and
    ``clock`` (per-agent time already committed by forced arcs); ``None``
    means the root. With ``per_agent_estimate`` each agent's estimate row
    only counts that agent's own free arcs; otherwise every agent's row sums
    the free running time of all agents.
    """
    n = rg.num_arcs
    K = rg.num_agents
    gcol = n
    fixed_one = set(node.fixed_one) if node is not None else set()
    fixed_zero = set(node.fixed_zero) if node is not None else set()
    clock = list(node.clock) if node is not None else [0] * K
    _walk_degree_check(rg, fixed_one, fixed_zero)

    c = np.zeros(n + 1)
    c[:n] = rg.weights
    c[gcol] = 1.0
    lo = np.zeros(n + 1)
    hi = np.full(n + 1, float(cap))
    hi[gcol] = np.inf
    for a in fixed_one:
        lo[a] = hi[a] = 1.0
    for a in fixed_zero:
        lo[a] = hi[a] = 0.0

    rows = []
    for v in range(rg.num_vertices):
        out, inn = rg.out_arcs[v], rg.in_arcs[v]
        rows.append(LpRow(out + inn, [1.0] * len(out) + [-1.0] * len(inn), "=", 0.0,
                          f"flow_{v}"))
    for k in range(K):
        out = rg.out_arcs[rg.source(k)]
        rows.append(LpRow(out, [1.0] * len(out), "=", 1.0, f"source_{k + 1}"))
    g = rg.inst.graph
    for q, fam in rg.copies_of.items():
        rows.append(LpRow(fam, [1.0] * len(fam), ">=" if relaxed else "=", 1.0,
                          f"serve_{g.arcs[q].id}"))

    free_real = [a.id for a in rg.arcs
                 if a.kind.is_real and a.id not in fixed_one and a.id not in fixed_zero]
    for k in range(K):
        own = [a for a in free_real if rg.arcs[a].agent == k] if per_agent_estimate else free_real
        idx = [gcol] + own
        val = [1.0] + [-float(rg.weights[a]) for a in own]
        rows.append(LpRow(idx, val, ">=", float(clock[k]), f"makespan_{k + 1}"))

    for i, cut in enumerate(cuts):
        rows.append(LpRow(cut.idx, [1.0] * len(cut.idx), ">=", float(cut.rhs), f"cut_{i}"))

    names = [arc_name(rg, a) for a in range(n)] + ["gamma_hat"]
    return LpProblem(c, lo, hi, rows, names=names)


def arc_name(rg: ReplicatedGraph, a: int) -> str:
    arc = rg.arcs[a]
    g = rg.inst.graph
    base = g.arcs[arc.base].id if arc.base >= 0 else ""
    kind = {ArcKind.INTRA: "d", ArcKind.INTER: "s", ArcKind.SOURCE_SINK: "st",
            ArcKind.SINK_SOURCE: "ts", ArcKind.SOURCE_DEPOT: "sd", ArcKind.DEPOT_SINK: "dt"}[arc.kind]
    return f"{kind}_{base}_k{arc.agent + 1}_l{arc.layer}".replace("__", "_")


def spatial_cost(rg: ReplicatedGraph, x) -> int:
    """Fuel of an integral arc vector (virtual arcs weigh nothing)."""
    x = np.rint(np.asarray(x, dtype=float)[: rg.num_arcs]).astype(np.int64)
    return int(rg.weights @ x)


def check_feasible_integer(rg: ReplicatedGraph, x, relaxed: bool = False) -> tuple[bool, str | None]:
    """Check flow, source and service rows for an integer arc vector."""
    x = np.asarray(x)[: rg.num_arcs]
    if np.any(x < 0):
        return False, f"negative value on arc {int(np.argmax(x < 0))}"
    for v in range(rg.num_vertices):
        bal = x[rg.out_arcs[v]].sum() - x[rg.in_arcs[v]].sum()
        if bal != 0:
            return False, f"flow_{v} ({rg.vertex_label(v)}) unbalanced by {bal}"
    for k in range(rg.num_agents):
        s = x[rg.out_arcs[rg.source(k)]].sum()
        if s != 1:
            return False, f"source_{k + 1} has outflow {s}"
    g = rg.inst.graph
    for q, fam in rg.copies_of.items():
        s = x[fam].sum()
        if s < 1 or (s > 1 and not relaxed):
            return False, f"serve_{g.arcs[q].id} covered {s} times"
    return True, None
