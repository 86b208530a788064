import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rpptu.bnc import SolveConfig, solve
from rpptu.generator import GenConfig, generate
from rpptu.oracle import oracle_optimum
from rpptu.polyhedra import enumerate_cgf_points
from rpptu.replicated import boundary, build
from rpptu.separation import Cut, check_cut_validity, find_cuts, make_cut, side_conditions

from conftest import oracle_vector, star_fractional_point, vec


def test_star_point_yields_violated_cut():
    rg, c, d, x = star_fractional_point()
    cuts = find_cuts(rg, x)
    assert cuts
    assert any(cut.lhs(x) == pytest.approx(0.5) for cut in cuts)
    for cut in cuts:
        assert side_conditions(rg, cut) == (True, "")
        assert check_cut_validity(rg, cut)[0]
    assert set(cuts[0].to_dict(rg)) == {"service", "agent", "S", "path", "support", "rhs"}


def test_integral_point_has_no_cuts():
    rg, c, d, _ = star_fractional_point()
    assert find_cuts(rg, c) == [] and find_cuts(rg, d) == []


def test_one_fractional_copy_per_agent_has_no_cuts():
    rg, _, _, _ = star_fractional_point()
    g = rg.inst.graph
    Q, R = g.arc_index("q"), g.arc_index("r")
    D = g.arc_index

    def route(k):
        other = 1 - k
        return vec(rg, [rg.source_depot[k], rg.intra[D("d01"), k, 1], rg.inter[Q, k, 1],
                        rg.intra[D("d20"), k, 2], rg.inter[R, k, 2], rg.intra[D("d30"), k, 3],
                        rg.depot_sink[k, 3], rg.source_sink[other]] + rg.sink_source)

    x = (route(0) + route(1)) / 2
    assert find_cuts(rg, x) == []


def test_pool_deduplicates():
    rg, _, _, x = star_fractional_point()
    first = find_cuts(rg, x)
    assert find_cuts(rg, x, first) == []


def test_bogus_row_is_rejected_with_witness():
    rg, _, _, x = star_fractional_point()
    cut = find_cuts(rg, x)[0]
    plus, _, _ = boundary(rg, cut.S)
    bogus = Cut(tuple(sorted(plus)), 2.0, cut.service, cut.S)
    valid, witness = check_cut_validity(rg, bogus)
    assert not valid and bogus.lhs(witness) < 2


def test_cut_around_all_copies_of_one_agent_is_valid():
    rg, _, _, _ = star_fractional_point()
    g = rg.inst.graph
    Q = g.arc_index("q")
    # S holds both endpoints of every agent-1 copy of q; agent 2 copies stay outside
    S = {rg.arcs[a].tail for a in rg.copies_of[Q] if rg.arcs[a].agent == 0}
    S |= {rg.arcs[a].head for a in rg.copies_of[Q] if rg.arcs[a].agent == 0}
    S = {v for v in S if not rg.is_depot_copy(v)}
    cut = make_cut(rg, Q, S)
    assert check_cut_validity(rg, cut)[0]


def test_side_condition_reasons():
    rg, _, _, x = star_fractional_point()
    g = rg.inst.graph
    depot = rg.vertex(g.depot, 0, 1)
    cut = make_cut(rg, g.arc_index("q"), {depot})
    assert side_conditions(rg, cut) == (False, "S contains a depot copy")
    three = rg.vertex(g.vertex_index("3"), 0, 2)
    cut = make_cut(rg, g.arc_index("q"), {three})
    assert side_conditions(rg, cut)[1] == "S touches a copy of another service arc"


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(2, 2))
def test_emitted_cuts_are_valid_and_keep_the_optimum(seed, k):
    inst = generate(GenConfig(num_vertices=4, arc_ratio=1.6, num_service=2, num_agents=k,
                              seed=seed, window_model="random", random_window_prob=0.9))
    rg = build(inst)
    emitted = []
    solve(inst, SolveConfig(on_cut=emitted.append, cut_side_conditions=False, node_budget=60))
    if not emitted:
        return
    cloud = enumerate_cgf_points(rg)
    best = oracle_vector(rg, oracle_optimum(inst)[1])
    for cut in emitted:
        assert check_cut_validity(rg, cut, cloud=cloud)[0]
        assert cut.lhs(best) >= cut.rhs
