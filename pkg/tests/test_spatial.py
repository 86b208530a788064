import numpy as np
import pytest

from rpptu.bnc import BnCNode
from rpptu.lp import LpStatus, solve_lp
from rpptu.oracle import oracle_optimum
from rpptu.replicated import build
from rpptu.spatial import InconsistentNode, assemble, check_feasible_integer, spatial_cost

from conftest import two_service_instance, oracle_vector, star_fractional_point, vec


def test_root_lp_shape(two_service_rg):
    lp = assemble(two_service_rg)
    assert len(lp.rows) == 28
    assert lp.num_cols == 43
    names = [r.name for r in lp.rows]
    assert names[22:24] == ["source_1", "source_2"]
    assert names[24:26] == ["serve_s1", "serve_s2"]
    assert names[26:] == ["makespan_1", "makespan_2"]


def test_estimate_row_without_commitments(two_service_rg):
    rg = two_service_rg
    shared = assemble(rg, per_agent_estimate=False).rows[-1]
    real = [a.id for a in rg.arcs if a.kind.is_real]
    assert sorted(shared.idx[1:].tolist()) == sorted(real)
    assert np.allclose(shared.val[1:], -rg.weights[shared.idx[1:]])
    own = assemble(rg).rows[-1]
    assert all(rg.arcs[a].agent == 1 for a in own.idx[1:])


def test_fixed_source_sink_silences_agent(two_service_rg):
    rg = two_service_rg
    node = BnCNode(0, -1, 0, ((), ()), (False, False), (None, None), (0, 0),
                   fixed_one=frozenset({rg.source_sink[1]}))
    res = solve_lp(assemble(rg, node))
    assert res.status == LpStatus.OPTIMAL
    assert res.x[rg.source_sink[1]] == 1.0
    assert all(abs(res.x[a]) < 1e-9 for a in rg.out_arcs[rg.source(1)] if a != rg.source_sink[1])


def test_contradictory_fixings(two_service_rg):
    rg = two_service_rg
    a = rg.source_sink[0]
    node = BnCNode(0, -1, 0, ((), ()), (False, False), (None, None), (0, 0),
                   fixed_one=frozenset({a}), fixed_zero=frozenset({a}))
    with pytest.raises(InconsistentNode):
        assemble(rg, node)


def test_spatial_cost_examples(two_service_rg):
    rg = two_service_rg
    idle = vec(rg, rg.source_sink + rg.sink_source)
    assert spatial_cost(rg, idle) == 0
    g = rg.inst.graph
    d = lambda n: rg.intra[g.arc_index(n), 0, 1]
    tour = vec(rg, [d("d1"), d("d2"), d("d3")])
    assert spatial_cost(rg, tour) == 3
    twice = vec(rg, [d("d1"), d("d1")])
    assert spatial_cost(rg, twice) == 2 * g.arcs[g.arc_index("d1")].weight


def test_feasibility_checker():
    rg, c, d, _ = star_fractional_point()
    g = rg.inst.graph
    # agent 1 serves q twice, agent 2 serves r: fine for the multi-visit relaxation only
    c[rg.source_sink[1]] = 0
    c += vec(rg, [rg.source_depot[1], rg.inter[g.arc_index("r"), 1, 1],
                  rg.intra[g.arc_index("d30"), 1, 2], rg.depot_sink[1, 2]])
    assert check_feasible_integer(rg, c, relaxed=True) == (True, None)
    ok, msg = check_feasible_integer(rg, c)
    assert not ok and "serve_q" in msg
    broken = c.copy()
    broken[rg.inter[g.arc_index("q"), 0, 2]] = 0
    ok, msg = check_feasible_integer(rg, broken, relaxed=True)
    assert not ok and msg.startswith("flow_")


def test_oracle_tour_is_feasible():
    inst = two_service_instance()
    rg = build(inst)
    cost, tour = oracle_optimum(inst)
    x = oracle_vector(rg, tour)
    assert check_feasible_integer(rg, x) == (True, None)
    assert spatial_cost(rg, x) == tour.fuel
