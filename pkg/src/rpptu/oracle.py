"""Exhaustive reference optimum for tiny instances.

Enumerates every split of the service arcs among agents, every service order
and every simple deadhead path between consecutive services, scheduling each
candidate by earliest departure. Only simple connecting paths are needed:
waiting is free, so a walk that revisits a vertex is matched in arrival time
by its loop-free shortcut (wait where the loop started) at strictly less fuel.

Partial routes reaching the same point with no later arrival and no more
fuel than another are dropped, for the same reason. The module deliberately
re-implements window handling instead of reusing the solver's helpers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx

from .graph import Instance


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class OracleTour:
    # per agent: list of (base arc index, serviced?) in travel order
    routes: tuple[tuple[tuple[int, bool], ...], ...]
    finish: tuple[int, ...]
    fuel: int

    @property
    def gamma(self) -> int:
        return max(self.finish)

    @property
    def cost(self) -> int:
        return self.fuel + self.gamma


def _depart(windows, t, w):
    moved = True
    while moved:
        moved = False
        for lo, hi in windows:
            if lo - w < t < hi:
                t = hi
                moved = True
    return t


def _front(states):
    """Keep (time, fuel, trace) states not dominated in (time, fuel)."""
    states = sorted(states, key=lambda s: (s[0], s[1], s[2]))
    keep = []
    for s in states:
        if all(s[1] < k[1] for k in keep):
            keep.append(s)
    return keep


def oracle_optimum(inst: Instance, max_vertices: int = 7, max_service: int = 4,
                   max_agents: int = 3) -> tuple[int, OracleTour]:
    g = inst.graph
    service = g.service_arcs
    if g.num_vertices > max_vertices or len(service) > max_service or inst.num_agents > max_agents:
        raise OracleLimitError(
            f"instance too large for exhaustive search "
            f"(|V|={g.num_vertices}, services={len(service)}, agents={inst.num_agents})")
    windows = {q: list(inst.calendar.of(q)) for q in range(len(g.arcs))}
    weight = [a.weight for a in g.arcs]

    dg = nx.MultiDiGraph()
    dg.add_nodes_from(range(g.num_vertices))
    for q, a in enumerate(g.arcs):
        if not a.service:
            dg.add_edge(a.tail, a.head, key=q)
    paths = {}
    for u in range(g.num_vertices):
        for v in range(g.num_vertices):
            if u == v:
                paths[u, v] = [()]
            else:
                paths[u, v] = sorted(tuple(e[2] for e in p) for p in nx.all_simple_edge_paths(dg, u, v))

    def walk(states, pos, target):
        out = []
        for t, f, trace in states:
            for p in paths[pos, target]:
                tt, ff = t, f
                for q in p:
                    tt = _depart(windows[q], tt, weight[q]) + weight[q]
                    ff += weight[q]
                out.append((tt, ff, trace + tuple((q, False) for q in p)))
        return _front(out)

    def agent_front(subset):
        if not subset:
            return [(0, 0, ())]
        results = []
        for order in itertools.permutations(subset):
            states = [(0, 0, ())]
            pos = g.depot
            for q in order:
                a = g.arcs[q]
                states = walk(states, pos, a.tail)
                states = _front([
                    (_depart(windows[q], t, a.weight) + a.weight, f + a.weight, tr + ((q, True),))
                    for t, f, tr in states
                ])
                pos = a.head
            results.extend(walk(states, pos, g.depot))
        return _front(results)

    fronts = {}
    best = None
    K = inst.num_agents
    for owner in itertools.product(range(K), repeat=len(service)):
        parts = tuple(tuple(q for q, o in zip(service, owner) if o == k) for k in range(K))
        per_agent = []
        for part in parts:
            if part not in fronts:
                fronts[part] = agent_front(part)
            per_agent.append(fronts[part])
        for combo in itertools.product(*per_agent):
            fuel = sum(s[1] for s in combo)
            finish = tuple(s[0] for s in combo)
            cost = fuel + max(finish)
            key = (cost, fuel, finish)
            if best is None or key < best[0]:
                best = (key, OracleTour(tuple(s[2] for s in combo), finish, fuel))
    return best[0][0], best[1]
