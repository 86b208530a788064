"""Integer-point enumeration and exact rank checks for the multi-visit relaxation.

In the relaxation a service arc may be served more than once and arc values
are non-negative integers. Each integer point splits into one cascade cycle
through every source (agent routes whose layer segments are simple paths)
plus non-negative combinations of directed cycles inside single layers, so
the polyhedron is the hull of the route points plus the cone of layer cycles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .replicated import ReplicatedGraph


class EnumerationLimit(RuntimeError):
    pass


# -- exact rank ---------------------------------------------------------------

class ExactRank:
    """Incremental fraction-free row reduction over the integers."""

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: dict[int, list[int]] = {}   # pivot column -> reduced row

    @property
    def rank(self) -> int:
        return len(self.rows)

    def add(self, vec) -> bool:
        v = [int(t) for t in vec]
        for p in sorted(self.rows):
            if v[p]:
                r = self.rows[p]
                a, b = r[p], v[p]
                v = [a * vi - b * ri for vi, ri in zip(v, r)]
                g = 0
                for t in v:
                    if t:
                        g = math.gcd(g, t)
                if g > 1:
                    v = [t // g for t in v]
        piv = next((j for j, t in enumerate(v) if t), None)
        if piv is None:
            return False
        # keep existing rows free of the new pivot so reduction stays one pass
        self.rows[piv] = v
        for p, r in list(self.rows.items()):
            if p != piv and r[piv]:
                a, b = v[piv], r[piv]
                nr = [a * ri - b * vi for ri, vi in zip(r, v)]
                g = 0
                for t in nr:
                    if t:
                        g = math.gcd(g, t)
                self.rows[p] = [t // g for t in nr] if g > 1 else nr
        return True


def exact_rank(vectors, ncols: int | None = None, stop_at: int | None = None) -> int:
    vectors = list(vectors)
    if not vectors:
        return 0
    er = ExactRank(ncols if ncols is not None else len(vectors[0]))
    for v in vectors:
        er.add(v)
        if stop_at is not None and er.rank >= stop_at:
            break
    return er.rank


def equality_rank(rg: ReplicatedGraph) -> int:
    """Exact rank of the flow-balance and source rows."""
    rows = []
    for v in range(rg.num_vertices):
        r = [0] * rg.num_arcs
        for a in rg.out_arcs[v]:
            r[a] += 1
        for a in rg.in_arcs[v]:
            r[a] -= 1
        rows.append(r)
    for k in range(rg.num_agents):
        r = [0] * rg.num_arcs
        for a in rg.out_arcs[rg.source(k)]:
            r[a] = 1
        rows.append(r)
    return exact_rank(rows, rg.num_arcs)


# -- enumeration --------------------------------------------------------------

def _simple_paths(rg: ReplicatedGraph):
    g = rg.inst.graph
    dg = nx.MultiDiGraph()
    dg.add_nodes_from(range(g.num_vertices))
    for q in g.deadhead_arcs:
        dg.add_edge(g.arcs[q].tail, g.arcs[q].head, key=q)
    paths = {}
    for u in range(g.num_vertices):
        for v in range(g.num_vertices):
            paths[u, v] = [()] if u == v else sorted(
                tuple(e[2] for e in p) for p in nx.all_simple_edge_paths(dg, u, v))
    return paths


def base_cycles(rg: ReplicatedGraph) -> list[tuple[int, ...]]:
    """All simple directed cycles of the deadhead graph, as base-arc tuples."""
    g = rg.inst.graph
    dg = nx.MultiDiGraph()
    for q in g.deadhead_arcs:
        dg.add_edge(g.arcs[q].tail, g.arcs[q].head, key=q)
    simple = nx.DiGraph()
    simple.add_edges_from((u, v) for u, v, _ in dg.edges(keys=True))
    cycles = []
    for cyc in nx.simple_cycles(simple):
        hops = list(zip(cyc, cyc[1:] + cyc[:1]))
        options = [sorted(dg[u][v]) for u, v in hops]   # parallel arcs give separate cycles
        for choice in itertools.product(*options):
            cycles.append(tuple(choice))
    cycles.sort(key=lambda c: (len(c), c))
    return cycles


def _agent_routes(rg: ReplicatedGraph, k: int, paths, limit: int):
    """Sparse arc sets of every source->sink route of agent k with simple layer segments."""
    g = rg.inst.graph
    service = g.service_arcs
    L = rg.num_layers
    routes = [((rg.source_sink[k],), frozenset())]

    def extend(layer, pos, arcs, served):
        # finish here: walk home and drop to the sink
        if layer >= 2:
            for p in paths[pos, g.depot]:
                routes.append((arcs + tuple(rg.intra[q, k, layer] for q in p)
                               + (rg.depot_sink[k, layer],), frozenset(served)))
                if len(routes) > limit:
                    raise EnumerationLimit(f"more than {limit} routes for agent {k + 1}")
        if layer == L:
            return
        for q in service:
            a = g.arcs[q]
            for p in paths[pos, a.tail]:
                extend(layer + 1, a.head,
                       arcs + tuple(rg.intra[d, k, layer] for d in p) + (rg.inter[q, k, layer],),
                       served | {q})

    extend(1, g.depot, (rg.source_depot[k],), set())
    return routes


@dataclass
class PointCloud:
    rg: ReplicatedGraph = field(repr=False)
    points: list[np.ndarray]
    rays: list[np.ndarray]            # a basis of the layer-cycle space
    all_cycles: list[np.ndarray]      # every simple layer cycle (used for tight faces)
    cap: int = 2

    @property
    def dim_upper(self) -> int:
        return self.rg.num_arcs - equality_rank(self.rg)


def _vec(n, arcs):
    v = np.zeros(n, dtype=np.int64)
    for a in arcs:
        v[a] += 1
    return v


def layer_cycle_vectors(rg: ReplicatedGraph) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """(basis, all) of intra-layer directed cycles for every agent and layer."""
    cyc = base_cycles(rg)
    n = rg.num_arcs
    g = rg.inst.graph
    nbasis = len(g.deadhead_arcs) - g.num_vertices + 1
    er = ExactRank(len(g.arcs))
    chosen = []
    for c in cyc:
        if er.add(_vec(len(g.arcs), c).tolist()):
            chosen.append(c)
        if len(chosen) == nbasis:
            break
    basis, every = [], []
    for k in range(rg.num_agents):
        for l in range(1, rg.num_layers + 1):
            basis += [_vec(n, [rg.intra[q, k, l] for q in c]) for c in chosen]
            every += [_vec(n, [rg.intra[q, k, l] for q in c]) for c in cyc]
    return basis, every


def enumerate_cgf_points(rg: ReplicatedGraph, cap: int = 2, max_arcs: int = 400,
                         limit: int = 200_000) -> PointCloud:
    """Cascade-route points of the relaxation, plus layer-cycle rays.

    With ``cap >= 2`` each point is also augmented by every single layer cycle
    whose arcs stay within the cap.
    """
    if rg.num_arcs > max_arcs:
        raise EnumerationLimit(f"{rg.num_arcs} arcs exceeds the enumeration limit {max_arcs}")
    paths = _simple_paths(rg)
    per_agent = [_agent_routes(rg, k, paths, limit) for k in range(rg.num_agents)]
    need = set(rg.inst.graph.service_arcs)
    n = rg.num_arcs
    cascade = list(rg.sink_source)
    points = []
    total = 1
    for r in per_agent:
        total *= len(r)
    if total > limit * 50:
        raise EnumerationLimit(f"{total} route combinations exceed the limit")
    for combo in itertools.product(*per_agent):
        served = set().union(*(s for _, s in combo))
        if served != need:
            continue
        arcs = [a for r, _ in combo for a in r] + cascade
        points.append(_vec(n, arcs))
        if len(points) > limit:
            raise EnumerationLimit(f"more than {limit} points")
    basis, every = layer_cycle_vectors(rg)
    if cap >= 2 and points:
        extra = []
        for p in points[:1]:
            for c in every:
                q = p + c
                if q.max() <= cap:
                    extra.append(q)
        points += extra
    return PointCloud(rg, points, basis, every, cap)


def affine_dimension(cloud: PointCloud, stop_at: int | None = None) -> int:
    """Exact rank of {p - p0} together with the ray basis."""
    if not cloud.points:
        raise ValueError("empty point cloud")
    p0 = cloud.points[0]
    n = len(p0)
    er = ExactRank(n)
    for r in cloud.rays:
        er.add(r.tolist())
    for p in cloud.points[1:]:
        if stop_at is not None and er.rank >= stop_at:
            break
        d = p - p0
        if d.any():
            er.add(d.tolist())
    return er.rank


def _affine_rank(points, rays, n, stop_at=None) -> int:
    if not points:
        return -1
    p0 = points[0]
    er = ExactRank(n)
    for r in rays:
        er.add(r.tolist())
        if stop_at is not None and er.rank >= stop_at:
            return er.rank
    for p in points[1:]:
        d = p - p0
        if d.any():
            er.add(d.tolist())
        if stop_at is not None and er.rank >= stop_at:
            break
    return er.rank


@dataclass
class FacetReport:
    valid: bool
    tight_dim: int
    dim: int
    facet: bool
    tight_points: int
    witness: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"valid": self.valid, "tight_dim": self.tight_dim, "dim": self.dim,
                "facet": self.facet, "tight_points": self.tight_points}


def _row(cut, n):
    w = np.zeros(n, dtype=np.int64)
    for a in cut.idx:
        w[a] += 1
    return w


def verify_facet(rg: ReplicatedGraph, cut, cloud: PointCloud, dim: int | None = None) -> FacetReport:
    """Validity and dimension of the face ``{x : w x = rhs}`` of the relaxation."""
    n = rg.num_arcs
    w = _row(cut, n)
    rhs = int(round(cut.rhs))
    if dim is None:
        dim = affine_dimension(cloud)
    witness = None
    tight = []
    for p in cloud.points:
        v = int(w @ p)
        if v < rhs:
            witness = p
            break
        if v == rhs:
            tight.append(p)
    valid = witness is None and all(int(w @ r) >= 0 for r in cloud.all_cycles)
    if not valid:
        return FacetReport(False, -1, dim, False, len(tight), witness)
    if not tight:
        return FacetReport(True, -1, dim, False, 0)
    flat = [r for r in cloud.all_cycles if int(w @ r) == 0]
    tight_dim = _affine_rank(tight, flat, n, stop_at=dim)
    return FacetReport(True, tight_dim, dim, tight_dim == dim - 1, len(tight))


# -- constructive family -------------------------------------------------------

def _shortest(paths, u, v):
    return min(paths[u, v], key=lambda p: (len(p), p))


def _route(rg, k, seq, paths, exit_layer=None):
    """Agent k serves ``seq`` (layer i+1 for entry i) and leaves via the depot."""
    g = rg.inst.graph
    arcs = [rg.source_depot[k]]
    pos = g.depot
    for l, q in enumerate(seq, start=1):
        a = g.arcs[q]
        arcs += [rg.intra[d, k, l] for d in _shortest(paths, pos, a.tail)]
        arcs.append(rg.inter[q, k, l])
        pos = a.head
    l = len(seq) + 1
    arcs += [rg.intra[d, k, l] for d in _shortest(paths, pos, g.depot)]
    arcs.append(rg.depot_sink[k, l])
    return arcs


def construct_lemma1_family(rg: ReplicatedGraph) -> list[np.ndarray]:
    """|A| - |V| + 1 affinely independent integer points of the relaxation.

    Order: base route X0 (agent 1 serves every arc once, the rest idle); one
    point per copy owned by agents 2..K; base route X0' (agent 2 serves all);
    one point per agent-1 copy unused by X0; one per intermediate agent-1
    depot exit; X0 plus each basis cycle in each layer of each agent.
    """
    K = rg.num_agents
    if K < 2:
        raise ValueError("the constructive family needs at least two agents")
    g = rg.inst.graph
    paths = _simple_paths(rg)
    S = g.service_arcs
    m = len(S)
    n = rg.num_arcs
    cascade = list(rg.sink_source)

    def point(routes):
        arcs = list(cascade)
        for k in range(K):
            arcs += routes.get(k, [rg.source_sink[k]])
        return _vec(n, arcs)

    base = _route(rg, 0, S, paths)
    base2 = _route(rg, 1, S, paths)
    fam = [point({0: base})]
    for k in range(1, K):
        for q in S:
            for l in range(1, m + 1):
                fam.append(point({0: base, k: _route(rg, k, [q] * l, paths)}))
    fam.append(point({1: base2}))
    for l in range(1, m + 1):
        for q in S:
            if q == S[l - 1]:
                continue
            seq = list(S)
            seq[l - 1] = q
            fam.append(point({0: _route(rg, 0, seq, paths), 1: base2}))
    for l in range(2, m + 1):
        fam.append(point({0: _route(rg, 0, S[: l - 1], paths), 1: base2}))
    basis, _ = layer_cycle_vectors(rg)
    fam += [fam[0] + c for c in basis]
    return fam


def family_affine_rank(points) -> int:
    p0 = points[0]
    return exact_rank([(p - p0).tolist() for p in points[1:]], len(p0))
