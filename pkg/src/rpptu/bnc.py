"""Best-first branch-and-cut over service-arc assignments.

A node commits, per agent, an ordered prefix of served arcs together with
the deadhead path used to reach each one; the layer of the k-th committed
arc is k. The node LP (see ``spatial.assemble``) bounds every completion of
those commitments. Branching picks one (agent, next layer) slot and creates a
child per available service arc, plus a child that retires the agent.

Two path policies are available. ``"pareto"`` creates one child per
non-dominated (arrival, fuel) connecting path, and also fixes the return to
the depot when an agent is retired; this makes the search exact. ``"fastest"``
commits only the earliest-arrival path and leaves the return leg to the LP.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import Instance
from .lp import EPS_INT, LpStatus, is_integral, solve_lp
from .replicated import ArcKind, ReplicatedGraph, build
from .separation import Cut, find_cuts
from .spatial import assemble, spatial_cost
from .temporal import (MalformedSolution, Trajectory, extend_over, pareto_filter,
                       pareto_paths, solve_temporal)

log = logging.getLogger("rpptu.bnc")

INF = float("inf")


@dataclass
class SolveConfig:
    use_cuts: bool = True
    node_budget: int = 1000
    time_budget: float | None = None
    path_mode: str = "pareto"          # or "fastest"
    symmetry: bool = True              # idle agents are interchangeable
    per_agent_estimate: bool = True
    lp_engine: str = "simplex"
    max_cut_rounds: int = 20
    cut_side_conditions: bool = True
    on_cut: object = None              # optional callable(Cut)


@dataclass
class BnCNode:
    id: int
    parent: int
    depth: int
    # per agent: tuple of (connecting path, served arc); the i-th entry sits in layer i + 1
    routes: tuple[tuple[tuple[tuple[int, ...], int], ...], ...]
    closed: tuple[bool, ...]
    returns: tuple[tuple[int, ...] | None, ...]
    clock: tuple[int, ...]
    lb: float = -INF
    ub: float = INF
    fixed_one: frozenset = frozenset()
    fixed_zero: frozenset = frozenset()
    cut_rounds: int = 0
    evaluated: bool = False

    @property
    def assignments(self) -> list[tuple[int, int, int]]:
        """(service arc, agent, layer) triples in layer order per agent."""
        return [(q, k, l + 1) for k, r in enumerate(self.routes) for l, (_, q) in enumerate(r)]

    def assigned(self) -> set[int]:
        return {q for r in self.routes for _, q in r}

    def available_arcs(self, service) -> list[int]:
        taken = self.assigned()
        return [q for q in service if q not in taken]

    @property
    def available_agents(self) -> list[int]:
        return [k for k, c in enumerate(self.closed) if not c]


@dataclass
class SolveStats:
    nodes: int = 0
    cut_rounds: int = 0
    cuts: int = 0
    lp_solves: int = 0
    lp_iterations: int = 0
    max_depth: int = 0
    best_lb: float = -INF
    best_ub: float = INF
    optimal: bool = False
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        def num(v):
            if v in (INF, -INF):
                return None
            return round(v, 6)

        return {
            "nodes": self.nodes, "cut_rounds": self.cut_rounds, "cuts": self.cuts,
            "lp_solves": self.lp_solves, "lp_iterations": self.lp_iterations,
            "max_depth": self.max_depth, "best_lb": num(self.best_lb),
            "best_ub": num(self.best_ub), "optimal": self.optimal,
            "wall_time": round(self.wall_time, 3),
        }


@dataclass
class SolveResult:
    status: str                       # "optimal", "gap" or "infeasible"
    objective: int | None
    trajectory: Trajectory | None
    x: np.ndarray | None
    stats: SolveStats
    rg: ReplicatedGraph = field(repr=False, default=None)

    @property
    def fuel(self):
        return None if self.trajectory is None else self.trajectory.fuel

    @property
    def gamma(self):
        return None if self.trajectory is None else self.trajectory.gamma

    def to_dict(self, inst: Instance) -> dict:
        traj = self.trajectory.to_dict(inst) if self.trajectory else None
        return {
            "status": self.status,
            "objective": self.objective,
            "fuel": self.fuel,
            "gamma": self.gamma,
            "per_agent": traj["agents"] if traj else [],
            "stats": self.stats.to_dict(),
        }


def node_fixings(rg: ReplicatedGraph, routes, closed, returns) -> tuple[frozenset, frozenset]:
    """Arc values implied by the committed route prefixes."""
    ones, zeros = set(), set()
    L = rg.num_layers
    g = rg.inst.graph
    service = g.service_arcs
    dead = g.deadhead_arcs

    def layer_arcs(k, l):
        arcs = [rg.intra[q, k, l] for q in dead]
        if l < L:
            arcs += [rg.inter[q, k, l] for q in service]
        if l >= 2:
            arcs.append(rg.depot_sink[k, l])
        return arcs

    for k, route in enumerate(routes):
        m = len(route)
        if m == 0:
            if closed[k]:
                ones.add(rg.source_sink[k])
                zeros.add(rg.source_depot[k])
                for l in range(1, L + 1):
                    zeros.update(layer_arcs(k, l))
            continue
        ones.add(rg.source_depot[k])
        zeros.add(rg.source_sink[k])
        for l, (path, q) in enumerate(route, start=1):
            keep = {rg.intra[p, k, l] for p in path} | {rg.inter[q, k, l]}
            for a in layer_arcs(k, l):
                (ones if a in keep else zeros).add(a)
        if closed[k]:
            l = m + 1
            ones.add(rg.depot_sink[k, l])
            if l < L:
                zeros.update(rg.inter[q, k, l] for q in service)
            if returns[k] is not None:
                keep = {rg.intra[p, k, l] for p in returns[k]}
                for q in dead:
                    a = rg.intra[q, k, l]
                    (ones if a in keep else zeros).add(a)
            for l2 in range(l + 1, L + 1):
                zeros.update(layer_arcs(k, l2))
    for k, route in enumerate(routes):
        for l, (_, q) in enumerate(route, start=1):
            own = rg.inter[q, k, l]
            zeros.update(a for a in rg.copies_of[q] if a != own)
    return frozenset(ones), frozenset(zeros)


class BranchAndCut:
    def __init__(self, inst: Instance, config: SolveConfig | None = None):
        self.inst = inst
        self.cfg = config or SolveConfig()
        if self.cfg.path_mode not in ("pareto", "fastest"):
            raise ValueError(f"unknown path mode {self.cfg.path_mode!r}")
        self.rg = build(inst)
        self.service = inst.graph.service_arcs
        self.nodes: dict[int, BnCNode] = {}
        self.queue: dict[int, float] = {}
        self.pool: list[Cut] = []
        self.stats = SolveStats()
        self.best: tuple[int, Trajectory, np.ndarray] | None = None
        self._next_id = 0
        self._real = self.rg.real_mask()

    # -- node creation --------------------------------------------------
    def _new_node(self, parent: BnCNode | None, routes, closed, returns, clock) -> BnCNode:
        routes, closed = tuple(routes), list(closed)
        taken = {q for r in routes for _, q in r}
        if len(taken) == len(self.service):
            # nothing left to serve: agents without work can only stay home
            for k, r in enumerate(routes):
                if not r:
                    closed[k] = True
        ones, zeros = node_fixings(self.rg, routes, closed, returns)
        node = BnCNode(
            id=self._next_id, parent=parent.id if parent else -1,
            depth=parent.depth + 1 if parent else 0, routes=routes, closed=tuple(closed),
            returns=tuple(returns), clock=tuple(clock),
            lb=parent.lb if parent else -INF, ub=parent.ub if parent else INF,
            fixed_one=ones, fixed_zero=zeros,
        )
        self._next_id += 1
        self.nodes[node.id] = node
        self.queue[node.id] = node.lb
        self.stats.max_depth = max(self.stats.max_depth, node.depth)
        return node

    def root(self) -> BnCNode:
        K = self.inst.num_agents
        return self._new_node(None, [()] * K, [False] * K, [None] * K, [0] * K)

    # -- branching ------------------------------------------------------
    def _position(self, node, k):
        route = node.routes[k]
        g = self.inst.graph
        return g.depot if not route else g.arcs[route[-1][1]].head

    def _connecting_labels(self, node, k, q):
        """Candidate (path, arrival) pairs for agent k to serve q next."""
        g = self.inst.graph
        start = node.clock[k]
        labels = pareto_paths(self.inst, self._position(node, k), start)[g.arcs[q].tail]
        if not labels:
            return []
        if self.cfg.path_mode == "fastest":
            labels = labels[:1]
        return extend_over(self.inst, labels, q)

    def _return_labels(self, node, k):
        g = self.inst.graph
        labels = pareto_paths(self.inst, self._position(node, k), node.clock[k])[g.depot]
        return pareto_filter(labels)

    def select_target(self, node: BnCNode, x) -> int | None:
        """Agent whose next layer is branched on."""
        rg = self.rg
        open_agents = node.available_agents
        if not open_agents:
            return None
        avail = node.available_arcs(self.service)
        if not avail:
            if self.cfg.path_mode != "pareto":
                return None
            busy = [k for k in open_agents if node.routes[k]]
            return min(busy, key=lambda k: (len(node.routes[k]), k)) if busy else None
        eligible = [k for k in open_agents if node.routes[k]]
        idle = [k for k in open_agents if not node.routes[k]]
        eligible += idle[:1] if self.cfg.symmetry else idle
        if not eligible:
            return None
        key = lambda k: (len(node.routes[k]) + 1, k)
        xa = x[: rg.num_arcs]
        frac = np.abs(xa - np.round(xa)) > EPS_INT

        def next_copies(k):
            l = len(node.routes[k]) + 1
            return [rg.inter[q, k, l] for q in avail] if l < rg.num_layers else []

        cand = [k for k in eligible if any(frac[a] for a in next_copies(k))]
        if cand:
            return min(cand, key=key)
        if not frac.any():
            return min(eligible, key=key)
        later = [k for k in eligible
                 if any(frac[a.id] for a in rg.arcs
                        if a.agent == k and a.layer > len(node.routes[k]) + 1)]
        if later:
            return min(later, key=key)
        return min(eligible, key=key)

    def branch(self, node: BnCNode, x) -> list[BnCNode]:
        k = self.select_target(node, x)
        if k is None:
            return []
        rg = self.rg
        avail = node.available_arcs(self.service)
        l = len(node.routes[k]) + 1
        children = []

        if avail and l < rg.num_layers:
            def frac_key(q):
                v = float(x[rg.inter[q, k, l]])
                return (-min(v - math.floor(v), math.ceil(v) - v), q)

            for q in sorted(avail, key=frac_key):
                for lab in self._connecting_labels(node, k, q):
                    routes = list(node.routes)
                    routes[k] = routes[k] + ((lab.arcs, q),)
                    clock = list(node.clock)
                    clock[k] = lab.arrive
                    children.append(self._new_node(node, routes, node.closed, node.returns, clock))

        # retire the agent
        others_open = [j for j in node.available_agents if j != k]
        if node.routes[k]:
            if avail and not others_open:
                return children
            if self.cfg.path_mode == "pareto":
                for lab in self._return_labels(node, k):
                    closed = list(node.closed)
                    closed[k] = True
                    returns = list(node.returns)
                    returns[k] = lab.arcs
                    clock = list(node.clock)
                    clock[k] = lab.arrive
                    children.append(self._new_node(node, node.routes, closed, returns, clock))
            elif others_open:
                closed = list(node.closed)
                closed[k] = True
                children.append(self._new_node(node, node.routes, closed, node.returns, node.clock))
        else:
            closed = list(node.closed)
            retire = [j for j in node.available_agents if not node.routes[j]] if self.cfg.symmetry else [k]
            for j in retire:
                closed[j] = True
            still_open = [j for j, c in enumerate(closed) if not c]
            if still_open or not avail:
                children.append(self._new_node(node, node.routes, closed, node.returns, node.clock))
        return children

    # -- main loop ------------------------------------------------------
    def _prunable(self, lb: float) -> bool:
        if self.best is None:
            return False
        return math.ceil(lb - 1e-6) >= self.best[0]

    def select_leaf(self) -> int | None:
        if not self.queue:
            return None
        nid = min(self.queue, key=lambda i: (self.queue[i], i))
        return None if self.queue[nid] == INF else nid

    def _solve_node_lp(self, node):
        lp = assemble(self.rg, node, self.pool, per_agent_estimate=self.cfg.per_agent_estimate)
        res = solve_lp(lp, engine=self.cfg.lp_engine)
        self.stats.lp_solves += 1
        self.stats.lp_iterations += res.iterations
        return res

    def _update_incumbent(self, node, x) -> None:
        try:
            traj = solve_temporal(self.rg, x)
        except MalformedSolution as exc:
            log.debug("node %d: integral point not decomposable (%s); keeping parent bound", node.id, exc)
            return
        cost = spatial_cost(self.rg, x) + traj.gamma
        node.ub = min(node.ub, cost)
        if self.best is None or cost <= self.best[0]:
            improved = self.best is None or cost < self.best[0]
            self.best = (cost, traj, np.rint(x[: self.rg.num_arcs]).astype(np.int64))
            self.stats.best_ub = cost
            if improved:
                log.info("node %d: incumbent %d (fuel %d, makespan %d)", node.id, cost, traj.fuel, traj.gamma)

    def solve(self) -> SolveResult:
        t0 = time.perf_counter()
        cfg = self.cfg
        self.root()
        exhausted = True
        while True:
            nid = self.select_leaf()
            if nid is None:
                break
            node = self.nodes[nid]
            if self._prunable(self.queue[nid]):
                break
            if not node.evaluated:
                if self.stats.nodes >= cfg.node_budget or (
                        cfg.time_budget is not None and time.perf_counter() - t0 > cfg.time_budget):
                    exhausted = False
                    break
                node.evaluated = True
                self.stats.nodes += 1
            self.queue[nid] = INF
            res = self._solve_node_lp(node)
            if res.status != LpStatus.OPTIMAL:
                del self.queue[nid]
                continue
            node.lb = max(node.lb, res.objective)
            x = res.x
            if self._prunable(node.lb):
                del self.queue[nid]
                continue
            integral, _ = is_integral(x[: self.rg.num_arcs])
            if integral:
                self._update_incumbent(node, x)
                if self._prunable(node.lb):
                    del self.queue[nid]
                    continue
            elif cfg.use_cuts and node.cut_rounds < cfg.max_cut_rounds:
                cuts = find_cuts(self.rg, x, self.pool, check_side_conditions=cfg.cut_side_conditions)
                if cuts:
                    node.cut_rounds += 1
                    self.stats.cut_rounds += 1
                    self.stats.cuts += len(cuts)
                    self.pool.extend(cuts)
                    if cfg.on_cut is not None:
                        for c in cuts:
                            cfg.on_cut(c)
                    self.queue[nid] = node.lb
                    continue
            del self.queue[nid]
            self.branch(node, x)

        self.stats.wall_time = time.perf_counter() - t0
        finite = [v for v in self.queue.values() if v != INF]
        if self.best is None:
            status = "infeasible" if exhausted else "gap"
            self.stats.best_lb = min(finite, default=INF)
            return SolveResult(status, None, None, None, self.stats, self.rg)
        cost, traj, xb = self.best
        open_lb = min(finite, default=INF)
        self.stats.best_lb = min(cost, open_lb)
        optimal = exhausted or self._prunable(open_lb)
        self.stats.optimal = optimal
        if optimal:
            self.stats.best_lb = cost
        return SolveResult("optimal" if optimal else "gap", cost, traj, xb, self.stats, self.rg)


def solve(inst: Instance, config: SolveConfig | None = None) -> SolveResult:
    return BranchAndCut(inst, config).solve()


def select_leaf(queue: dict[int, float]) -> int | None:
    """Smallest lower bound first, smallest id on ties; None once every entry is infinite."""
    if not queue:
        return None
    nid = min(queue, key=lambda i: (queue[i], i))
    return None if queue[nid] == INF else nid
