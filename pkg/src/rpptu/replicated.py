"""Layered, cascaded multi-agent expansion of a base instance.

Every agent gets ``|A_*| + 1`` copies of the base vertex set. Deadhead arcs are
copied inside each layer; each service arc is copied once per (agent, layer)
as an arc from layer ``l`` to layer ``l + 1``, so the order in which an agent
serves arcs is encoded by the layer it leaves from. A source and a sink per
agent plus the sink -> next-source cascade make the whole graph one strongly
connected component.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .graph import Instance


class ArcKind(enum.IntEnum):
    INTRA = 0        # deadhead copy inside a layer
    INTER = 1        # service-arc copy, layer l -> l + 1
    SOURCE_SINK = 2  # agent does nothing
    SINK_SOURCE = 3  # cascade: sink k -> source k + 1
    SOURCE_DEPOT = 4
    DEPOT_SINK = 5

    @property
    def is_real(self) -> bool:
        return self in (ArcKind.INTRA, ArcKind.INTER)


@dataclass(frozen=True)
class RArc:
    id: int
    kind: ArcKind
    tail: int
    head: int
    agent: int
    layer: int          # layer of the tail (0 for source/sink plumbing)
    base: int = -1      # base arc index, -1 for virtual arcs
    weight: int = 0


@dataclass
class ReplicatedGraph:
    inst: Instance
    num_agents: int
    num_layers: int
    arcs: list[RArc]
    num_vertices: int
    copies_of: dict[int, list[int]]
    # lookups keyed by (base arc, agent, layer) / agent / (agent, layer)
    intra: dict[tuple[int, int, int], int]
    inter: dict[tuple[int, int, int], int]
    source_sink: list[int]
    sink_source: list[int]
    source_depot: list[int]
    depot_sink: dict[tuple[int, int], int]
    out_arcs: list[list[int]] = field(repr=False)
    in_arcs: list[list[int]] = field(repr=False)
    tails: np.ndarray = field(repr=False)
    heads: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    # vertex numbering -------------------------------------------------
    def vertex(self, i: int, k: int, l: int) -> int:
        """Id of base vertex ``i`` in layer ``l`` (1-based) of agent ``k``."""
        nv = self.inst.graph.num_vertices
        return k * nv * self.num_layers + (l - 1) * nv + i

    def source(self, k: int) -> int:
        g = self.inst.graph
        return g.num_vertices * self.num_agents * self.num_layers + 2 * k

    def sink(self, k: int) -> int:
        return self.source(k) + 1

    def vertex_info(self, v: int) -> tuple[str, int, int, int]:
        """Return ``(kind, base_vertex, agent, layer)``; kind in {'layer','source','sink'}."""
        nv = self.inst.graph.num_vertices
        nl = nv * self.num_agents * self.num_layers
        if v >= nl:
            k, r = divmod(v - nl, 2)
            return ("sink" if r else "source", -1, k, 0)
        k, rest = divmod(v, nv * self.num_layers)
        l, i = divmod(rest, nv)
        return ("layer", i, k, l + 1)

    def vertex_label(self, v: int) -> str:
        kind, i, k, l = self.vertex_info(v)
        if kind == "layer":
            return f"{self.inst.graph.vertices[i]}@k{k + 1}l{l}"
        return f"{kind}{k + 1}"

    def is_depot_copy(self, v: int) -> bool:
        kind, i, _, _ = self.vertex_info(v)
        return kind == "layer" and i == self.inst.graph.depot

    # derived sets ------------------------------------------------------
    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    def arcs_of_kind(self, kind: ArcKind) -> list[int]:
        return [a.id for a in self.arcs if a.kind == kind]

    def real_mask(self) -> np.ndarray:
        return np.array([a.kind.is_real for a in self.arcs], dtype=bool)

    def agent_arcs(self, k: int) -> list[int]:
        """Arcs owned by agent ``k`` (the cascade arc leaving its sink included)."""
        return [a.id for a in self.arcs if a.agent == k]

    def to_networkx(self, arcset=None) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(range(self.num_vertices))
        ids = range(self.num_arcs) if arcset is None else sorted(arcset)
        for a in ids:
            arc = self.arcs[a]
            g.add_edge(arc.tail, arc.head, key=a)
        return g


def build(inst: Instance) -> ReplicatedGraph:
    g = inst.graph
    nv = g.num_vertices
    K = inst.num_agents
    service = g.service_arcs
    dead = g.deadhead_arcs
    L = len(service) + 1
    nvert = nv * K * L + 2 * K

    arcs: list[RArc] = []
    intra, inter, depot_sink = {}, {}, {}
    source_sink, sink_source, source_depot = [], [], []
    copies_of = {q: [] for q in service}

    def vid(i, k, l):
        return k * nv * L + (l - 1) * nv + i

    def src(k):
        return nv * K * L + 2 * k

    def add(kind, tail, head, k, l, base=-1):
        w = g.arcs[base].weight if base >= 0 else 0
        arcs.append(RArc(len(arcs), kind, tail, head, k, l, base, w))
        return len(arcs) - 1

    for k in range(K):
        source_depot.append(add(ArcKind.SOURCE_DEPOT, src(k), vid(g.depot, k, 1), k, 0))
        source_sink.append(add(ArcKind.SOURCE_SINK, src(k), src(k) + 1, k, 0))
        for l in range(1, L + 1):
            for q in dead:
                a = g.arcs[q]
                intra[q, k, l] = add(ArcKind.INTRA, vid(a.tail, k, l), vid(a.head, k, l), k, l, q)
            if l < L:
                for q in service:
                    a = g.arcs[q]
                    inter[q, k, l] = add(ArcKind.INTER, vid(a.tail, k, l), vid(a.head, k, l + 1), k, l, q)
                    copies_of[q].append(inter[q, k, l])
            if l >= 2:
                depot_sink[k, l] = add(ArcKind.DEPOT_SINK, vid(g.depot, k, l), src(k) + 1, k, l)
        sink_source.append(add(ArcKind.SINK_SOURCE, src(k) + 1, src((k + 1) % K), k, 0))

    out_arcs = [[] for _ in range(nvert)]
    in_arcs = [[] for _ in range(nvert)]
    for a in arcs:
        out_arcs[a.tail].append(a.id)
        in_arcs[a.head].append(a.id)

    return ReplicatedGraph(
        inst=inst, num_agents=K, num_layers=L, arcs=arcs, num_vertices=nvert,
        copies_of=copies_of, intra=intra, inter=inter, source_sink=source_sink,
        sink_source=sink_source, source_depot=source_depot, depot_sink=depot_sink,
        out_arcs=out_arcs, in_arcs=in_arcs,
        tails=np.array([a.tail for a in arcs], dtype=np.int64),
        heads=np.array([a.head for a in arcs], dtype=np.int64),
        weights=np.array([a.weight for a in arcs], dtype=np.int64),
    )


def boundary(rg: ReplicatedGraph, S) -> tuple[set[int], set[int], set[int]]:
    """Split arcs touching ``S`` into (leaving, entering, inside)."""
    S = set(S)
    plus, minus, inner = set(), set(), set()
    for v in S:
        for a in rg.out_arcs[v]:
            (inner if rg.arcs[a].head in S else plus).add(a)
        for a in rg.in_arcs[v]:
            if rg.arcs[a].tail not in S:
                minus.add(a)
    return plus, minus, inner


def components_within(rg: ReplicatedGraph, arcset) -> list[set[int]]:
    """Weakly connected components of the subgraph spanned by ``arcset``."""
    g = nx.Graph()
    for a in arcset:
        arc = rg.arcs[a]
        g.add_edge(arc.tail, arc.head)
    comps = [set(c) for c in nx.connected_components(g)]
    comps.sort(key=min)
    return comps


def category_counts(rg: ReplicatedGraph) -> dict[str, int]:
    counts = defaultdict(int)
    for a in rg.arcs:
        counts[a.kind.name] += 1
    return {k.name: counts[k.name] for k in ArcKind}


def to_dot(rg: ReplicatedGraph) -> str:
    lines = ["digraph replicated {"]
    for v in range(rg.num_vertices):
        lines.append(f'  n{v} [label="{rg.vertex_label(v)}"];')
    g = rg.inst.graph
    for a in rg.arcs:
        base = f' base="{g.arcs[a.base].id}"' if a.base >= 0 else ""
        lines.append(
            f'  n{a.tail} -> n{a.head} [id="{a.id}" category="{a.kind.name}"'
            f' agent={a.agent + 1} layer={a.layer} weight={a.weight}{base}];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
