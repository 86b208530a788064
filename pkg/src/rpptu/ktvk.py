"""Two-corridor railway fixture with a periodic train timetable.

Three hubs (v1 depot, v3, v4) are joined by single-track corridors. Each
corridor is a chain of stations; nine track sections need inspecting and
each of those has a parallel deadhead so agents can pass without serving.
Trains repeat every 74 minutes and block a section while they are on it.

``corridor_optimum`` is an independent exact check restricted to tours that
move corridor by corridor (never turning around mid-corridor), which is the
only sensible way to move on this network.
"""

from __future__ import annotations

import heapq
from importlib import resources

from .graph import Instance, build_instance, instance_from_dict
from .oracle import _depart

PERIOD = 74
HORIZON = 3 * PERIOD

# name, station sequence, section running times, inspected section positions
CHAINS = [
    ("kt_fast_dn1", [1, 2], [4], {0}),
    ("kt_fast_dn2", [2, 5, 6, 3], [5, 4, 5], set()),
    ("kt_fast_up1", [3, 7, 8, 2], [4, 5, 3], set()),
    ("kt_fast_up2", [2, 9, 1], [3, 3], set()),
    ("kt_slow_dn", [1, 10, 11, 13, 3], [6, 6, 6, 6], set()),
    ("kt_slow_up", [3, 15, 12, 14, 16, 1], [5, 5, 6, 5, 5], {2}),
    ("tv_dn1", [3, 17, 18, 19, 20, 4], [7, 8, 7, 8, 7], {1, 2, 3}),
    ("tv_up", [4, 21, 22, 23, 3], [8, 7, 8, 7], set()),
    ("tv_dn2", [3, 35, 36, 4], [13, 14, 13], set()),
    ("kv_dn1", [1, 24, 25, 26, 4], [6, 7, 7, 6], {1, 2}),
    ("kv_dn2", [1, 31, 33, 4], [10, 10, 10], set()),
    ("kv_up1", [4, 27, 32, 34, 1], [8, 7, 8, 7], {2}),
    ("kv_up2", [4, 28, 29, 30, 1], [6, 7, 7, 6], {3}),
]

# train services: (chains run in order, departure offsets within the period)
TIMETABLE = [
    (["kt_fast_dn1", "kt_fast_dn2"], [0, 29, 57, 65]),
    (["kt_fast_up1", "kt_fast_up2"], [11, 41, 67]),
    (["kt_slow_dn"], [5, 13, 22, 29, 36, 43, 51, 58, 65, 72]),
    (["kt_slow_up"], [21, 32, 40]),
    (["tv_dn1"], [7, 20, 21, 34, 63]),
    (["tv_dn2"], [2, 35, 58, 61]),
    (["tv_up"], [7, 20, 29, 45, 54, 63, 72]),
    (["kv_dn1"], [28, 60, 73]),
    (["kv_dn2"], [8, 31, 54, 58, 69]),
    (["kv_up1"], [11, 16, 35, 46]),
    (["kv_up2"], [37]),
    (["kt_fast_up1"], [5, 17, 23, 29, 35, 64, 73]),
    (["kt_fast_up2"], [69]),
]


def chain_arcs() -> dict[str, list[list[str]]]:
    """Arc ids per chain section: the section arc first, then its parallel if any."""
    out = {}
    for name, seq, ws, svc in CHAINS:
        out[name] = [[f"{name}_{j + 1}"] + ([f"{name}_{j + 1}p"] if j in svc else [])
                     for j in range(len(ws))]
    return out


def _occupation(timetable, weight, sections, horizon, period):
    occ = {}
    for route, departs in timetable:
        for off in departs:
            # start two periods early so trains already on the line at t=0 show up
            t0 = off - 2 * period
            while t0 < horizon:
                t = t0
                for cn in route:
                    for ids in sections[cn]:
                        w = weight[ids[0]]
                        lo, hi = max(t, 0), min(t + w, horizon)
                        if lo < hi:
                            for aid in ids:
                                occ.setdefault(aid, []).append((lo, hi))
                        t += w
                t0 += period
    wins = {}
    for aid, ivs in occ.items():
        merged = []
        for lo, hi in sorted(ivs):
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        wins[aid] = merged
    return wins


def build_ktvk(with_windows: bool = True, num_agents: int = 2, timetable=None) -> Instance:
    """36 stations, 45 track sections plus 9 parallel deadheads."""
    vertices = [f"v{i}" for i in range(1, 37)]
    arcs = []
    for name, seq, ws, svc in CHAINS:
        for j, (u, v) in enumerate(zip(seq, seq[1:])):
            arcs.append((f"{name}_{j + 1}", f"v{u}", f"v{v}", ws[j], j in svc))
    for name, seq, ws, svc in CHAINS:
        for j in sorted(svc):
            arcs.append((f"{name}_{j + 1}p", f"v{seq[j]}", f"v{seq[j + 1]}", ws[j], False))
    windows = {}
    if with_windows:
        weight = {a[0]: a[3] for a in arcs}
        windows = _occupation(timetable or TIMETABLE, weight, chain_arcs(), HORIZON, PERIOD)
    name = "ktvk_exa" if with_windows else "ktvk_exc"
    return build_instance(vertices, arcs, "v1", windows=windows, horizon=HORIZON,
                          num_agents=num_agents, name=name)


def load_bundled(name: str = "ktvk_exa") -> Instance:
    import json

    text = resources.files("rpptu").joinpath("data", f"{name}.json").read_text()
    return instance_from_dict(json.loads(text))


def _corridors(inst: Instance):
    """Maximal deadhead chains between hubs, with the service arcs they cover."""
    g = inst.graph
    nv = g.num_vertices
    indeg, outdeg = [0] * nv, [0] * nv
    for a in g.arcs:
        if not a.service:
            outdeg[a.tail] += 1
            indeg[a.head] += 1
    hubs = {v for v in range(nv) if not (indeg[v] == 1 and outdeg[v] == 1)}
    bit = {}
    for i, q in enumerate(g.service_arcs):
        a = g.arcs[q]
        bit[(a.tail, a.head, a.weight)] = 1 << i
    nxt = {}
    for r, b in enumerate(g.arcs):
        if not b.service:
            nxt.setdefault(b.tail, []).append(r)
    out = []
    for q, a in enumerate(g.arcs):
        if a.service or a.tail not in hubs:
            continue
        seq, v = [q], a.head
        while v not in hubs:
            r = nxt[v][0]
            seq.append(r)
            v = g.arcs[r].head
        mask = 0
        for r in seq:
            b = g.arcs[r]
            mask |= bit.get((b.tail, b.head, b.weight), 0)
        out.append((a.tail, v, tuple(seq), mask, sum(g.arcs[r].weight for r in seq)))
    return out


def corridor_optimum(inst: Instance, fuel_cap: int = 150):
    """Best two-agent plans over corridor-level closed walks, sorted by cost.

    Each entry is (cost, (finish, fuel) of walk 1, (finish, fuel) of walk 2,
    corridor indices of walk 1, corridor indices of walk 2); an empty second
    walk means one agent stays home. Serving a section happens on the pass
    that covers it, so the fuel of a walk is the sum of its corridors.
    """
    if inst.num_agents != 2:
        raise ValueError("corridor_optimum handles two agents")
    g = inst.graph
    chains = _corridors(inst)
    full = (1 << len(g.service_arcs)) - 1
    wins = {q: list(inst.calendar.of(q)) for q in range(len(g.arcs))}
    wt = [a.weight for a in g.arcs]
    front = {}

    def dominated(key, t, f):
        return any(tt <= t and ff <= f for tt, ff, _ in front.get(key, ()))

    heap = [(0, 0, g.depot, 0, ())]
    while heap:
        f, t, v, m, path = heapq.heappop(heap)
        if dominated((v, m), t, f):
            continue
        front.setdefault((v, m), []).append((t, f, path))
        for ci, (u, w, seq, cm, cf) in enumerate(chains):
            if u != v or f + cf > fuel_cap:
                continue
            tt = t
            for r in seq:
                tt = _depart(wins[r], tt, wt[r]) + wt[r]
            if not dominated((w, m | cm), tt, f + cf):
                heapq.heappush(heap, (f + cf, tt, w, m | cm, path + (ci,)))

    closed = {}
    for (v, m), lst in front.items():
        if v == g.depot:
            for t, f, p in lst:
                if p:
                    closed.setdefault(m, []).append((f, t, p))
    plans = [(f + t, (t, f), (0, 0), p, ()) for f, t, p in closed.get(full, [])]
    masks = list(closed)
    for i, m1 in enumerate(masks):
        for m2 in masks[i:]:
            if m1 | m2 != full:
                continue
            for f1, t1, p1 in closed[m1]:
                for f2, t2, p2 in closed[m2]:
                    plans.append((f1 + f2 + max(t1, t2), (t1, f1), (t2, f2), p1, p2))
    plans.sort()
    return plans
