"""Base problem data: directed multigraph, unavailability calendar, instance I/O."""

from __future__ import annotations

import bisect
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import networkx as nx


class InstanceError(ValueError):
    """Raised when an instance violates a structural invariant."""


class InstanceParseError(InstanceError):
    """Raised when an instance file cannot be parsed."""


@dataclass(frozen=True)
class Arc:
    id: str
    tail: int
    head: int
    weight: int
    service: bool = False


@dataclass(frozen=True)
class BaseGraph:
    """Directed multigraph with dense vertex indices.

    ``vertices`` holds the external vertex ids; arcs reference vertices by
    position. Parallel arcs are allowed and are told apart by ``Arc.id``.
    """

    vertices: tuple[str, ...]
    arcs: tuple[Arc, ...]
    depot: int
    _arc_index: dict = field(init=False, repr=False, compare=False)
    _vertex_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "arcs", tuple(self.arcs))
        n = len(self.vertices)
        if n == 0:
            raise InstanceError("graph has no vertices")
        if len(set(self.vertices)) != n:
            raise InstanceError("duplicate vertex ids")
        if not 0 <= self.depot < n:
            raise InstanceError(f"depot index {self.depot} out of range")
        seen = set()
        for a in self.arcs:
            if a.id in seen:
                raise InstanceError(f"duplicate arc id {a.id!r}")
            seen.add(a.id)
            if not (0 <= a.tail < n and 0 <= a.head < n):
                raise InstanceError(f"arc {a.id!r} references an unknown vertex")
            if a.tail == a.head:
                raise InstanceError(f"arc {a.id!r} is a self-loop")
            if not isinstance(a.weight, int) or isinstance(a.weight, bool) or a.weight < 1:
                raise InstanceError(f"arc {a.id!r} must have an integer weight >= 1, got {a.weight!r}")
        if not any(a.service for a in self.arcs):
            raise InstanceError("graph has no service arcs")
        dead = nx.MultiDiGraph()
        dead.add_nodes_from(range(n))
        dead.add_edges_from((a.tail, a.head) for a in self.arcs if not a.service)
        if not nx.is_strongly_connected(dead):
            comps = sorted(sorted(self.vertices[v] for v in c) for c in nx.strongly_connected_components(dead))
            raise InstanceError(f"deadhead subgraph is not strongly connected; components: {comps}")
        object.__setattr__(self, "_arc_index", {a.id: q for q, a in enumerate(self.arcs)})
        object.__setattr__(self, "_vertex_index", {v: i for i, v in enumerate(self.vertices)})

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def service_arcs(self) -> list[int]:
        return [q for q, a in enumerate(self.arcs) if a.service]

    @property
    def deadhead_arcs(self) -> list[int]:
        return [q for q, a in enumerate(self.arcs) if not a.service]

    def arc_index(self, arc_id: str) -> int:
        return self._arc_index[arc_id]

    def vertex_index(self, vertex_id: str) -> int:
        return self._vertex_index[vertex_id]

    def out_deadheads(self) -> list[list[int]]:
        out = [[] for _ in self.vertices]
        for q, a in enumerate(self.arcs):
            if not a.service:
                out[a.tail].append(q)
        return out


Window = tuple[int, int]


def _canonical_windows(arc_label: str, intervals: Iterable[Sequence[int]], horizon: int) -> tuple[Window, ...]:
    ivs = []
    for iv in intervals:
        if len(iv) != 2:
            raise InstanceError(f"arc {arc_label}: window {iv!r} is not a pair")
        lo, hi = iv
        if not all(isinstance(t, int) and not isinstance(t, bool) for t in (lo, hi)):
            raise InstanceError(f"arc {arc_label}: window {iv!r} has non-integer bounds")
        if not 0 <= lo < hi:
            raise InstanceError(f"arc {arc_label}: window ({lo}, {hi}) needs 0 <= lo < hi")
        if hi > horizon:
            raise InstanceError(f"arc {arc_label}: window ({lo}, {hi}) ends after horizon {horizon}")
        ivs.append((lo, hi))
    ivs.sort()
    merged: list[list[int]] = []
    for lo, hi in ivs:
        if merged and lo < merged[-1][1]:
            raise InstanceError(f"arc {arc_label}: windows ({merged[-1][0]}, {merged[-1][1]}) and ({lo}, {hi}) overlap")
        if merged and lo == merged[-1][1]:
            merged[-1][1] = hi
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class UnavailabilityCalendar:
    """Per-arc blocking windows, keyed by base arc index, in canonical form."""

    windows: Mapping[int, tuple[Window, ...]]
    horizon: int

    def __post_init__(self):
        if not isinstance(self.horizon, int) or self.horizon < 0:
            raise InstanceError(f"horizon must be a non-negative integer, got {self.horizon!r}")
        canon = {}
        for q in sorted(self.windows):
            ivs = _canonical_windows(str(q), self.windows[q], self.horizon)
            if ivs:
                canon[q] = ivs
        object.__setattr__(self, "windows", canon)
        object.__setattr__(self, "_lows", {q: [lo for lo, _ in ivs] for q, ivs in canon.items()})

    def of(self, arc: int) -> tuple[Window, ...]:
        return self.windows.get(arc, ())

    @property
    def count(self) -> int:
        return sum(len(v) for v in self.windows.values())


def is_window_blocked(cal: UnavailabilityCalendar, arc: int, depart: int, weight: int) -> bool:
    """True iff departing on ``arc`` at ``depart`` collides with a window.

    A window (lo, hi) forbids departures strictly inside (lo - weight, hi).
    """
    ivs = cal.windows.get(arc)
    if not ivs:
        return False
    # only the last window starting before depart + weight can block
    k = bisect.bisect_left(cal._lows[arc], depart + weight) - 1
    if k < 0:
        return False
    lo, hi = ivs[k]
    return lo - weight < depart < hi


def earliest_departure(cal: UnavailabilityCalendar, arc: int, t: int, weight: int) -> int:
    """Smallest departure time >= t at which ``arc`` is not blocked."""
    ivs = cal.windows.get(arc)
    if not ivs:
        return t
    lows = cal._lows[arc]
    k = bisect.bisect_left(lows, t + weight) - 1
    if k < 0:
        return t
    while k < len(ivs):
        lo, hi = ivs[k]
        if lo - weight < t < hi:
            t = hi
            k += 1
            continue
        if t <= lo - weight:
            break
        k += 1
    return t


@dataclass(frozen=True)
class Instance:
    graph: BaseGraph
    calendar: UnavailabilityCalendar
    num_agents: int
    name: str = "instance"

    def __post_init__(self):
        if not isinstance(self.num_agents, int) or self.num_agents < 1:
            raise InstanceError(f"num_agents must be >= 1, got {self.num_agents!r}")
        for q in self.calendar.windows:
            if not 0 <= q < len(self.graph.arcs):
                raise InstanceError(f"calendar references unknown arc index {q}")

    def to_dict(self) -> dict:
        g = self.graph
        return {
            "name": self.name,
            "num_agents": self.num_agents,
            "horizon": self.calendar.horizon,
            "depot": g.vertices[g.depot],
            "vertices": list(g.vertices),
            "arcs": [
                {"id": a.id, "tail": g.vertices[a.tail], "head": g.vertices[a.head],
                 "weight": a.weight, "service": a.service}
                for a in g.arcs
            ],
            "windows": {g.arcs[q].id: [list(w) for w in ivs] for q, ivs in sorted(self.calendar.windows.items())},
        }


def build_instance(
    vertices: Sequence[str],
    arcs: Sequence[tuple],
    depot: str,
    *,
    windows: Mapping[str, Iterable[Sequence[int]]] | None = None,
    horizon: int = 0,
    num_agents: int = 1,
    name: str = "instance",
) -> Instance:
    """Convenience constructor from external ids.

    ``arcs`` items are ``(id, tail, head, weight, service)`` tuples.
    """
    vidx = {v: i for i, v in enumerate(vertices)}
    if len(vidx) != len(vertices):
        raise InstanceError("duplicate vertex ids")
    built = []
    for item in arcs:
        aid, tail, head, weight, service = item
        for end in (tail, head):
            if end not in vidx:
                raise InstanceError(f"arc {aid!r} references unknown vertex {end!r}")
        built.append(Arc(str(aid), vidx[tail], vidx[head], weight, bool(service)))
    if depot not in vidx:
        raise InstanceError(f"depot {depot!r} is not a vertex")
    graph = BaseGraph(tuple(vertices), tuple(built), vidx[depot])
    windows = windows or {}
    by_index = {}
    for aid, ivs in windows.items():
        if aid not in graph._arc_index:
            raise InstanceError(f"windows reference unknown arc {aid!r}")
        q = graph.arc_index(aid)
        try:
            by_index[q] = _canonical_windows(repr(aid), ivs, horizon)
        except InstanceError:
            raise
    cal = UnavailabilityCalendar(by_index, horizon)
    return Instance(graph, cal, num_agents, name)


def instance_from_dict(data: Mapping) -> Instance:
    try:
        vertices = [str(v) for v in data["vertices"]]
        arcs = [(a["id"], str(a["tail"]), str(a["head"]), a["weight"], a.get("service", False))
                for a in data["arcs"]]
        return build_instance(
            vertices, arcs, str(data["depot"]),
            windows=data.get("windows") or {},
            horizon=data.get("horizon", 0),
            num_agents=data.get("num_agents", 1),
            name=data.get("name", "instance"),
        )
    except (KeyError, TypeError) as exc:
        raise InstanceParseError(f"malformed instance data: {exc!r}") from exc


def load_instance(path: str | os.PathLike) -> Instance:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceParseError(f"{path}: top level must be an object")
    return instance_from_dict(data)


def dumps_instance(inst: Instance) -> str:
    """Canonical text form: one arc and one window list per line."""
    d = inst.to_dict()
    lines = ["{"]
    for key in ("name", "num_agents", "horizon", "depot"):
        lines.append(f"  {json.dumps(key)}: {json.dumps(d[key])},")
    lines.append(f'  "vertices": {json.dumps(d["vertices"])},')
    arcs = [f"    {json.dumps(a)}" for a in d["arcs"]]
    lines.append('  "arcs": [\n' + ",\n".join(arcs) + "\n  ],")
    if d["windows"]:
        wins = [f"    {json.dumps(k)}: {json.dumps(v)}" for k, v in d["windows"].items()]
        lines.append('  "windows": {\n' + ",\n".join(wins) + "\n  }")
    else:
        lines.append('  "windows": {}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def save_instance(inst: Instance, path: str | os.PathLike) -> None:
    Path(path).write_text(dumps_instance(inst))
