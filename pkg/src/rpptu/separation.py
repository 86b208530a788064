"""Connectivity cuts tying repeated fractional copies of one service arc.

When an agent's LP point splits a service arc over two copies in different
layers and the fractional support links the first copy's head to the second
copy's tail, the vertices along that link form a set S. Every integer route
either leaves S or serves the arc by a copy lying completely outside S, so

    sum(x over arcs leaving S) + sum(x over copies of the arc outside S) >= 1.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .lp import EPS_FEAS, EPS_INT
from .replicated import ArcKind, ReplicatedGraph, boundary, components_within


@dataclass(frozen=True)
class Cut:
    idx: tuple[int, ...]        # arc ids with coefficient 1
    rhs: float
    service: int                # base index of the repeated service arc
    S: frozenset[int]
    agent: int = -1
    path: tuple[int, ...] = field(default=(), compare=False)

    @property
    def signature(self) -> tuple:
        return (self.service, tuple(sorted(self.S)))

    def lhs(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x[list(self.idx)].sum())

    def to_dict(self, rg: ReplicatedGraph) -> dict:
        return {
            "service": rg.inst.graph.arcs[self.service].id,
            "agent": self.agent + 1,
            "S": [rg.vertex_label(v) for v in sorted(self.S)],
            "path": list(self.path),
            "support": list(self.idx),
            "rhs": self.rhs,
        }


def make_cut(rg: ReplicatedGraph, service: int, S, agent: int = -1, path=()) -> Cut:
    S = frozenset(S)
    plus, _, _ = boundary(rg, S)
    outside = {a for a in rg.copies_of[service]
               if rg.arcs[a].tail not in S and rg.arcs[a].head not in S}
    return Cut(tuple(sorted(plus | outside)), 1.0, service, S, agent, tuple(path))


def side_conditions(rg: ReplicatedGraph, cut: Cut) -> tuple[bool, str]:
    """Structural requirements under which the cut is claimed facet-defining."""
    S = cut.S
    if any(rg.is_depot_copy(v) for v in S):
        return False, "S contains a depot copy"
    plus, minus, inner = boundary(rg, S)
    touching = plus | minus | inner
    for q, fam in rg.copies_of.items():
        if q != cut.service and any(a in touching for a in fam):
            return False, "S touches a copy of another service arc"
    own = set(rg.copies_of[cut.service])
    for comp in components_within(rg, touching):
        if not any(a in own for a in touching
                   if rg.arcs[a].tail in comp or rg.arcs[a].head in comp):
            return False, "a component of A(S)+delta(S) has no copy of the service arc"
    rest = np.array([v not in S for v in range(rg.num_vertices)])
    keep = rest[rg.tails] & rest[rg.heads]
    n = rg.num_vertices
    adj = csr_matrix((np.ones(int(keep.sum())), (rg.tails[keep], rg.heads[keep])), shape=(n, n))
    _, labels = connected_components(adj, directed=True, connection="strong")
    if len(set(labels[rest].tolist())) != 1:
        return False, "the complement of S is not strongly connected"
    return True, ""


def _support_path(rg, support, src, dst):
    """Shortest arc path from src to dst using support arcs (BFS, first-found order)."""
    if src == dst:
        return []
    prev = {src: None}
    dq = deque([src])
    while dq:
        v = dq.popleft()
        for a in rg.out_arcs[v]:
            if a not in support:
                continue
            w = rg.arcs[a].head
            if w in prev:
                continue
            prev[w] = a
            if w == dst:
                path = []
                while w != src:
                    a = prev[w]
                    path.append(a)
                    w = rg.arcs[a].tail
                return path[::-1]
            dq.append(w)
    return None


def find_cuts(rg: ReplicatedGraph, x, pool=None, *, check_side_conditions: bool = True,
              eps_int: float = EPS_INT, eps_feas: float = EPS_FEAS) -> list[Cut]:
    """Violated cuts for the LP point ``x``, skipping signatures already in ``pool``."""
    x = np.asarray(x, dtype=float)[: rg.num_arcs]
    seen = {c.signature for c in (pool or ())}
    found = []
    frac = (x > eps_int) & (x < 1 - eps_int)
    for k in range(rg.num_agents):
        support = {a.id for a in rg.arcs
                   if a.agent == k and a.kind != ArcKind.SINK_SOURCE and x[a.id] > eps_int}
        for q, fam in rg.copies_of.items():
            copies = sorted((rg.arcs[a].layer, a) for a in fam if rg.arcs[a].agent == k and frac[a])
            if len(copies) < 2:
                continue
            for i in range(len(copies)):
                for j in range(i + 1, len(copies)):
                    c1, c2 = copies[i][1], copies[j][1]
                    link = _support_path(rg, support, rg.arcs[c1].head, rg.arcs[c2].tail)
                    if link is None:
                        continue
                    path = [c1] + link + [c2]
                    S = {rg.arcs[a].tail for a in path} | {rg.arcs[a].head for a in path}
                    S = {v for v in S if not rg.is_depot_copy(v)}
                    if not S:
                        continue
                    cut = make_cut(rg, q, S, k, path)
                    if cut.signature in seen:
                        continue
                    if cut.lhs(x) >= 1 - eps_feas:
                        continue
                    if check_side_conditions and not side_conditions(rg, cut)[0]:
                        continue
                    seen.add(cut.signature)
                    found.append(cut)
    return found


def check_cut_validity(rg: ReplicatedGraph, cut: Cut, cap: int = 2, cloud=None):
    """Brute-force validity over all integer relaxed-model points; returns (valid, witness)."""
    from .polyhedra import enumerate_cgf_points

    if cloud is None:
        cloud = enumerate_cgf_points(rg, cap=cap)
    for p in cloud.points:
        if cut.lhs(p) < cut.rhs - 1e-9:
            return False, p
    # rays only enter with nonnegative multipliers and unit coefficients are nonnegative
    return True, None
