import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpptu.generator import GenConfig, generate
from rpptu.graph import build_instance, earliest_departure
from rpptu.replicated import build
from rpptu.temporal import (MalformedSolution, extract_walks, fastest_path, gantt, pareto_paths,
                            propagate, solve_temporal)

from conftest import vec


def line(window=None):
    arcs = [("a", "1", "2", 2, True), ("b", "2", "1", 3, False), ("c", "1", "2", 2, False),
            ("e", "2", "3", 4, False), ("f", "3", "1", 1, False)]
    wins = {"a": [window], "c": [window]} if window else {}
    return build_instance(["1", "2", "3"], arcs, "1", windows=wins, horizon=30)


def route_vector(rg, k_arcs):
    """Agent 1 walks the given (kind, base, layer) steps, agent 2 idles if present."""
    arcs = [rg.source_depot[0]] + list(rg.sink_source)
    layer = 1
    for kind, q in k_arcs:
        if kind == "s":
            arcs.append(rg.inter[q, 0, layer])
            layer += 1
        else:
            arcs.append(rg.intra[q, 0, layer])
    arcs.append(rg.depot_sink[0, layer])
    for k in range(1, rg.num_agents):
        arcs.append(rg.source_sink[k])
    return vec(rg, arcs)


def test_no_windows_no_waiting():
    inst = line()
    rg = build(inst)
    g = inst.graph
    x = route_vector(rg, [("s", g.arc_index("a")), ("d", g.arc_index("b"))])
    traj = solve_temporal(rg, x)
    assert traj.gamma == 5 and traj.fuel == 5 and traj.agents[0].waiting == 0


def test_single_window_forces_wait():
    inst = line((5, 9))
    steps, finish = propagate(inst, [inst.graph.arc_index("a")], start=4)
    assert steps == [(0, 9, 11, 5)] and finish == 11


def test_schedule_respects_windows():
    inst = line((1, 6))
    rg = build(inst)
    g = inst.graph
    x = route_vector(rg, [("s", g.arc_index("a")), ("d", g.arc_index("b"))])
    traj = solve_temporal(rg, x)
    s0 = traj.agents[0].steps[0]
    assert (s0.depart, s0.arrive, s0.wait_before, s0.service) == (6, 8, 6, True)
    assert traj.gamma == 11 and traj.agents[0].waiting == 6
    d = traj.to_dict(inst)
    assert d["agents"][0]["steps"][0]["arc"] == "a"
    assert "agent 1" in gantt(traj, inst)


def test_malformed_vectors():
    inst = line()
    rg = build(inst)
    x = np.zeros(rg.num_arcs)
    with pytest.raises(MalformedSolution):
        extract_walks(rg, x)
    x[rg.source_sink[0]] = 2
    with pytest.raises(MalformedSolution):
        extract_walks(rg, x)


def test_fastest_path_examples():
    inst = line()
    g = inst.graph
    fp = fastest_path(inst, 0, 0, 7)
    assert fp.path == () and fp.arrive == 7 and fp.delay == 0
    fp = fastest_path(inst, 0, 2, 0)
    assert [g.arcs[q].id for q in fp.path] == ["c", "e"] and fp.arrive == 6 and fp.delay == 0
    blocked = line((5, 9))
    fp = fastest_path(blocked, 0, 1, 4)
    assert fp.arrive == 11 and fp.delay == 5


def test_pareto_labels_trade_time_for_fuel():
    # a short blocked arc and a long free detour
    arcs = [("s", "1", "2", 1, True), ("x", "1", "2", 1, False), ("y", "1", "3", 2, False),
            ("z", "3", "2", 2, False), ("w", "2", "1", 1, False)]
    inst = build_instance(["1", "2", "3"], arcs, "1", windows={"x": [[0, 10]], "s": [[0, 10]]}, horizon=10)
    labels = pareto_paths(inst, 0, 0)[1]
    assert [(l.arrive, l.fuel) for l in labels] == [(4, 4), (11, 1)]


def brute_arrivals(inst, src, start, depth):
    """All (arrival, fuel) of deadhead walks with at most ``depth`` arcs."""
    g = inst.graph
    out = {src: {(start, 0)}}
    frontier = [(src, start, 0)]
    for _ in range(depth):
        nxt = []
        for v, t, f in frontier:
            for q in g.out_deadheads()[v]:
                a = g.arcs[q]
                tt = earliest_departure(inst.calendar, q, t, a.weight) + a.weight
                nxt.append((a.head, tt, f + a.weight))
                out.setdefault(a.head, set()).add((tt, f + a.weight))
        frontier = nxt
    return out


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), start=st.integers(0, 60))
def test_pareto_labels_dominate_every_walk(seed, start):
    inst = generate(GenConfig(num_vertices=5, arc_ratio=1.6, beta=0.3, seed=seed,
                              window_model="random", random_window_prob=0.8))
    labels = pareto_paths(inst, 0, start)
    walks = brute_arrivals(inst, 0, start, 5)
    g = inst.graph
    for v, pts in walks.items():
        labs = labels[v]
        assert labs, "reachable vertex without labels"
        for t, f in pts:
            assert any(l.arrive <= t and l.fuel <= f for l in labs)
        for l in labs:
            steps, finish = propagate(inst, l.arcs, start)
            assert finish == l.arrive and sum(g.arcs[q].weight for q in l.arcs) == l.fuel
        arrivals = [l.arrive for l in labs]
        fuels = [l.fuel for l in labs]
        assert arrivals == sorted(arrivals) and fuels == sorted(fuels, reverse=True)
        assert len(set(fuels)) == len(fuels)
