"""Seeded random instances and the with/without-cuts benchmark harness."""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal

import networkx as nx

from .graph import Instance, build_instance


def round_half_up(v: float) -> int:
    return int(Decimal(repr(v)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class GenConfig:
    num_vertices: int = 20
    arc_ratio: float = 1.2
    beta: float = 0.3
    num_agents: int = 1
    seed: int = 0
    num_service: int | None = None      # overrides beta when set
    weight_range: tuple[int, int] = (1, 10)
    window_model: str = "train"         # "train", "random" or "none"
    period: int = 74
    num_trains: int = 2
    horizon_periods: int = 3
    window_pad: int = 0                 # extra occupation after a train clears an arc
    random_window_prob: float = 0.5

    def __post_init__(self):
        if self.num_vertices < 2:
            raise ValueError("need at least two vertices")
        if round_half_up(self.arc_ratio * self.num_vertices) < self.num_vertices:
            raise ValueError("arc ratio too small for a Hamiltonian cycle")
        if self.window_model not in ("train", "random", "none"):
            raise ValueError(f"unknown window model {self.window_model!r}")

    @property
    def num_arcs(self) -> int:
        return round_half_up(self.arc_ratio * self.num_vertices)

    @property
    def service_count(self) -> int:
        if self.num_service is not None:
            return max(1, min(self.num_service, self.num_arcs))
        return max(1, round_half_up(self.beta * self.num_arcs))

    @property
    def horizon(self) -> int:
        return self.period * self.horizon_periods


def _merge(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [tuple(iv) for iv in out]


def generate(cfg: GenConfig) -> Instance:
    rng = random.Random(cfg.seed)
    n = cfg.num_vertices
    vertices = [f"v{i + 1}" for i in range(n)]
    order = list(range(n))
    rng.shuffle(order)
    pairs = [(order[i], order[(i + 1) % n]) for i in range(n)]
    used = set(pairs)
    candidates = [(u, v) for u in range(n) for v in range(n) if u != v and (u, v) not in used]
    rng.shuffle(candidates)
    pairs += candidates[: cfg.num_arcs - n]
    lo_w, hi_w = cfg.weight_range
    weights = [rng.randint(lo_w, hi_w) for _ in pairs]
    service = set(rng.sample(range(len(pairs)), cfg.service_count))

    arcs = [(f"a{i + 1}", vertices[u], vertices[v], weights[i], i in service)
            for i, (u, v) in enumerate(pairs)]
    # parallel deadheads along the cycle until the deadhead graph is strongly connected
    dg = nx.DiGraph()
    dg.add_nodes_from(range(n))
    dg.add_edges_from(p for i, p in enumerate(pairs) if i not in service)
    parallel_of = {}
    for i in range(n):
        if i not in service:
            continue
        u, v = pairs[i]
        comp = {c: j for j, cc in enumerate(nx.strongly_connected_components(dg)) for c in cc}
        if comp[u] != comp[v]:
            dg.add_edge(u, v)
            parallel_of[i] = len(arcs)
            arcs.append((f"a{i + 1}d", vertices[u], vertices[v], weights[i], False))

    windows = {}
    horizon = cfg.horizon
    if cfg.window_model == "train":
        P = cfg.period
        base = rng.randrange(P)
        occ = {i: [] for i in range(n)}
        cycle_len = sum(weights[:n])
        for j in range(cfg.num_trains):
            offset = base + j * P // cfg.num_trains
            entry = rng.randrange(n)
            start = offset - (cycle_len // P + 1) * P
            while start < horizon:
                t = start
                for s in range(n):
                    i = (entry + s) % n
                    lo, hi = t, t + weights[i] + cfg.window_pad
                    lo, hi = max(lo, 0), min(hi, horizon)
                    if lo < hi:
                        occ[i].append((lo, hi))
                    t += weights[i]
                start += P
        for i, ivs in occ.items():
            merged = _merge(ivs)
            if merged:
                windows[arcs[i][0]] = merged
                if i in parallel_of:
                    windows[arcs[parallel_of[i]][0]] = merged
    elif cfg.window_model == "random":
        for a in arcs:
            if rng.random() < cfg.random_window_prob:
                ivs = []
                for _ in range(rng.randint(1, 2)):
                    lo = rng.randrange(0, horizon - 1)
                    hi = rng.randint(lo + 1, min(horizon, lo + 30))
                    ivs.append((lo, hi))
                windows[a[0]] = _merge(ivs)

    name = (f"gen_v{n}_r{cfg.arc_ratio}_b{cfg.beta}_k{cfg.num_agents}_s{cfg.seed}"
            f"_{cfg.window_model}")
    return build_instance(vertices, arcs, vertices[0], windows=windows, horizon=horizon,
                          num_agents=cfg.num_agents, name=name)


@dataclass
class BatchRow:
    beta: float
    V: int
    A: int
    variant: str
    OPT: int
    NODES: float
    TIME_s: float
    nCP: float
    instances: int = 0
    failures: int = 0


def run_batch(cfgs, count: int, solver_config=None, base_seed: int = 0,
              variants=(("cuts", True), ("nocuts", False))) -> list[BatchRow]:
    """Solve ``count`` seeded instances per cell with and without cuts."""
    from .bnc import SolveConfig, solve

    solver_config = solver_config or SolveConfig()
    rows = []
    if count <= 0:
        return rows
    for cfg in cfgs:
        insts = [generate(replace(cfg, seed=base_seed + i)) for i in range(count)]
        for name, cuts in variants:
            sc = replace(solver_config, use_cuts=cuts)
            opt = nodes = secs = ncp = 0
            failures = 0
            for inst in insts:
                try:
                    res = solve(inst, sc)
                except Exception:  # recorded, not fatal
                    failures += 1
                    continue
                opt += res.status == "optimal"
                nodes += res.stats.nodes
                secs += res.stats.wall_time
                ncp += res.stats.cuts
            done = max(1, len(insts) - failures)
            rows.append(BatchRow(cfg.beta, cfg.num_vertices, cfg.num_arcs, name, opt,
                                 nodes / done, secs / done, ncp / done, len(insts), failures))
    return rows


def batch_csv(rows: list[BatchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["beta", "V", "A", "variant", "OPT", "NODES", "TIME_s", "nCP"])
    for r in rows:
        w.writerow([r.beta, r.V, r.A, r.variant, r.OPT, f"{r.NODES:.2f}", f"{r.TIME_s:.3f}",
                    f"{r.nCP:.2f}"])
    return buf.getvalue()
