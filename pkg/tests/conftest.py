import sys

import numpy as np
import pytest

from rpptu.graph import build_instance
from rpptu.replicated import build


def two_service_instance(num_agents=2):
    """Three vertices, four deadheads, two service arcs."""
    arcs = [("d1", "1", "2", 1, False), ("d2", "2", "3", 1, False), ("d3", "3", "1", 1, False),
            ("d4", "2", "1", 1, False), ("s1", "1", "2", 2, True), ("s2", "3", "2", 3, True)]
    return build_instance(["1", "2", "3"], arcs, "1", num_agents=num_agents, name="two_service")


def star_instance(leaves=0, num_agents=2, chord=False):
    """Depot 0 with spokes to 1, 2, 3; service q = 1->2 and r = 0->3.

    ``leaves`` adds spokes 0<->4, 0<->5, ...; ``chord`` adds a deadhead 1->2
    beside q.
    """
    names = ["0", "1", "2", "3"] + [str(4 + i) for i in range(leaves)]
    arcs = [("q", "1", "2", 2, True), ("r", "0", "3", 2, True)]
    pairs = [("0", "1"), ("1", "0"), ("0", "2"), ("2", "0"), ("2", "1"), ("0", "3"), ("3", "0")]
    pairs += [p for i in range(leaves) for p in (("0", str(4 + i)), (str(4 + i), "0"))]
    if chord:
        pairs.append(("1", "2"))
    arcs += [(f"d{a}{b}", a, b, 1, False) for a, b in pairs]
    return build_instance(names, arcs, "0", num_agents=num_agents, name="star")


def triangle_instance(window=None, num_agents=1):
    arcs = [("a", "1", "2", 1, True), ("b", "2", "3", 1, False), ("c", "3", "1", 1, False),
            ("e", "1", "2", 1, False)]
    windows = {"a": [window]} if window else {}
    return build_instance(["1", "2", "3"], arcs, "1", windows=windows, horizon=20,
                          num_agents=num_agents, name="triangle")


def vec(rg, arcs):
    v = np.zeros(rg.num_arcs, dtype=np.int64)
    for a in arcs:
        v[a] += 1
    return v


def star_fractional_point(inst=None):
    """Half of a route that serves q twice via the link 2->1, half of one serving r."""
    inst = inst or star_instance()
    rg = build(inst)
    g = inst.graph
    Q, R, D = g.arc_index("q"), g.arc_index("r"), g.arc_index
    rest = [rg.source_sink[k] for k in range(1, inst.num_agents)] + rg.sink_source
    c = vec(rg, [rg.source_depot[0], rg.intra[D("d01"), 0, 1], rg.inter[Q, 0, 1],
                 rg.intra[D("d21"), 0, 2], rg.inter[Q, 0, 2], rg.intra[D("d20"), 0, 3],
                 rg.depot_sink[0, 3]] + rest)
    d = vec(rg, [rg.source_depot[0], rg.inter[R, 0, 1], rg.intra[D("d30"), 0, 2],
                 rg.inter[R, 0, 2], rg.intra[D("d30"), 0, 3], rg.depot_sink[0, 3]] + rest)
    return rg, c, d, (c + d) / 2


def oracle_vector(rg, tour):
    """Replicated arc vector of an oracle tour (strict single-visit routes)."""
    arcs = list(rg.sink_source)
    for k, route in enumerate(tour.routes):
        if not route:
            arcs.append(rg.source_sink[k])
            continue
        arcs.append(rg.source_depot[k])
        l = 1
        for q, served in route:
            if served:
                arcs.append(rg.inter[q, k, l])
                l += 1
            else:
                arcs.append(rg.intra[q, k, l])
        arcs.append(rg.depot_sink[k, l])
    return vec(rg, arcs)


@pytest.fixture
def two_service():
    return two_service_instance()


@pytest.fixture
def two_service_rg(two_service):
    return build(two_service)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
