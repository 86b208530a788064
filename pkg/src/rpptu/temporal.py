"""Departure-time propagation for fixed routes, and time-dependent paths.

Waiting at a vertex is free and the earliest admissible departure is
non-decreasing in the arrival time, so departing as early as possible on
every arc yields the earliest finish for a fixed route.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np

from .graph import Instance, earliest_departure
from .replicated import ArcKind, ReplicatedGraph


class MalformedSolution(ValueError):
    """The arc vector does not decompose into one walk per agent."""


@dataclass(frozen=True)
class Step:
    arc: int          # replicated arc id
    base: int         # base arc index
    depart: int
    arrive: int
    wait_before: int
    service: bool


@dataclass
class AgentSchedule:
    agent: int
    steps: list[Step] = field(default_factory=list)
    finish: int = 0

    @property
    def fuel(self) -> int:
        return sum(s.arrive - s.depart for s in self.steps)

    @property
    def waiting(self) -> int:
        return self.finish - self.fuel


@dataclass
class Trajectory:
    agents: list[AgentSchedule]

    @property
    def gamma(self) -> int:
        return max((a.finish for a in self.agents), default=0)

    @property
    def fuel(self) -> int:
        return sum(a.fuel for a in self.agents)

    @property
    def cost(self) -> int:
        return self.fuel + self.gamma

    def to_dict(self, inst: Instance) -> dict:
        g = inst.graph
        return {
            "gamma": self.gamma,
            "agents": [
                {
                    "agent": a.agent + 1,
                    "finish": a.finish,
                    "fuel": a.fuel,
                    "waiting": a.waiting,
                    "steps": [
                        {"arc": g.arcs[s.base].id, "service": s.service, "depart": s.depart,
                         "arrive": s.arrive, "wait_before": s.wait_before}
                        for s in a.steps
                    ],
                }
                for a in self.agents
            ],
        }

    def to_json(self, inst: Instance) -> str:
        return json.dumps(self.to_dict(inst), indent=2, sort_keys=True)


def extract_walks(rg: ReplicatedGraph, x) -> list[list[int]]:
    """Split an integral arc vector into one source->sink arc list per agent."""
    x = np.rint(np.asarray(x, dtype=float)[: rg.num_arcs]).astype(np.int64)
    if np.any((x < 0) | (x > 1)):
        raise MalformedSolution("arc values must be 0 or 1")
    used = set(np.nonzero(x)[0].tolist())
    walks = []
    seen = set()
    for k in range(rg.num_agents):
        v, sink = rg.source(k), rg.sink(k)
        walk = []
        while v != sink:
            outs = [a for a in rg.out_arcs[v] if a in used]
            if len(outs) != 1:
                raise MalformedSolution(
                    f"vertex {rg.vertex_label(v)} has {len(outs)} used outgoing arcs")
            a = outs[0]
            if a in seen:
                raise MalformedSolution(f"agent {k + 1} walk revisits arc {a}")
            seen.add(a)
            walk.append(a)
            v = rg.arcs[a].head
        walks.append(walk)
    stray = used - seen - set(rg.sink_source)
    if stray:
        raise MalformedSolution(f"{len(stray)} used arcs lie off every agent walk")
    return walks


def propagate(inst: Instance, base_arcs, start: int = 0) -> tuple[list[tuple[int, int, int, int]], int]:
    """Earliest-departure pass along base arcs; returns (arc, depart, arrive, wait) tuples."""
    g, cal = inst.graph, inst.calendar
    t = start
    out = []
    for q in base_arcs:
        w = g.arcs[q].weight
        dep = earliest_departure(cal, q, t, w)
        out.append((q, dep, dep + w, dep - t))
        t = dep + w
    return out, t


def solve_temporal(rg: ReplicatedGraph, x) -> Trajectory:
    """Earliest schedule for the routes encoded in the integral vector ``x``."""
    walks = extract_walks(rg, x)
    inst = rg.inst
    horizon = inst.calendar.horizon
    agents = []
    for k, walk in enumerate(walks):
        real = [a for a in walk if rg.arcs[a].kind.is_real]
        steps, finish = propagate(inst, [rg.arcs[a].base for a in real])
        sched = AgentSchedule(k)
        for a, (q, dep, arr, wait) in zip(real, steps):
            # every window closes by the horizon, so no departure can be pushed past it
            assert wait == 0 or dep <= horizon
            sched.steps.append(Step(a, q, dep, arr, wait, rg.arcs[a].kind == ArcKind.INTER))
        sched.finish = finish
        agents.append(sched)
    return Trajectory(agents)


@dataclass(frozen=True)
class PathLabel:
    arrive: int
    fuel: int
    arcs: tuple[int, ...]

    def delay(self, start: int) -> int:
        return self.arrive - start - self.fuel


def pareto_paths(inst: Instance, source: int, start: int) -> list[list[PathLabel]]:
    """Non-dominated (arrival, fuel) deadhead paths from ``source`` to every vertex.

    Labels are settled in (arrival, fuel) order; a label is kept only if its
    fuel beats every label already settled at the same vertex. Each vertex's
    list is ordered by increasing arrival and strictly decreasing fuel.
    """
    g, cal = inst.graph, inst.calendar
    outs = g.out_deadheads()
    best = [None] * g.num_vertices
    result: list[list[PathLabel]] = [[] for _ in range(g.num_vertices)]
    heap = [(start, 0, (), source)]
    while heap:
        t, f, arcs, v = heapq.heappop(heap)
        if best[v] is not None and f >= best[v]:
            continue
        best[v] = f
        result[v].append(PathLabel(t, f, arcs))
        for q in outs[v]:
            a = g.arcs[q]
            nf = f + a.weight
            if best[a.head] is not None and nf >= best[a.head]:
                continue
            dep = earliest_departure(cal, q, t, a.weight)
            heapq.heappush(heap, (dep + a.weight, nf, arcs + (q,), a.head))
    return result


@dataclass(frozen=True)
class FastestPath:
    path: tuple[int, ...]
    arrive: int
    delay: int


def fastest_path(inst: Instance, src: int, dst: int, start: int) -> FastestPath | None:
    """Earliest-arrival deadhead path (least fuel among equally early ones)."""
    labels = pareto_paths(inst, src, start)[dst]
    if not labels:
        return None
    lab = labels[0]
    return FastestPath(lab.arcs, lab.arrive, lab.delay(start))


def extend_over(inst: Instance, labels, arc: int) -> list[PathLabel]:
    """Traverse ``arc`` after each label and keep the non-dominated results."""
    g, cal = inst.graph, inst.calendar
    w = g.arcs[arc].weight
    ext = []
    for lab in labels:
        dep = earliest_departure(cal, arc, lab.arrive, w)
        ext.append(PathLabel(dep + w, lab.fuel + w, lab.arcs))
    return pareto_filter(ext)


def pareto_filter(labels) -> list[PathLabel]:
    out = []
    for lab in sorted(labels, key=lambda s: (s.arrive, s.fuel, s.arcs)):
        if not out or lab.fuel < out[-1].fuel:
            out.append(lab)
    return out


def gantt(traj: Trajectory, inst: Instance, width: int = 72) -> str:
    """Plain-text timeline: '=' running, '.' waiting, '*' service arcs."""
    g = inst.graph
    span = max(traj.gamma, 1)
    scale = width / span
    lines = [f"makespan {traj.gamma}  fuel {traj.fuel}  cost {traj.cost}"]
    for a in traj.agents:
        bar = [" "] * (width + 1)
        for s in a.steps:
            lo = int(round((s.depart - s.wait_before) * scale))
            mid = int(round(s.depart * scale))
            hi = int(round(s.arrive * scale))
            for c in range(lo, mid):
                bar[c] = "."
            for c in range(mid, max(hi, mid + 1)):
                bar[min(c, width)] = "*" if s.service else "="
        lines.append(f"agent {a.agent + 1} |{''.join(bar).rstrip()}| finish {a.finish} wait {a.waiting}")
        for s in a.steps:
            tag = "serve" if s.service else "move "
            lines.append(f"    {tag} {g.arcs[s.base].id:>8}  wait {s.wait_before:>4}  "
                         f"depart {s.depart:>5}  arrive {s.arrive:>5}")
    return "\n".join(lines) + "\n"
