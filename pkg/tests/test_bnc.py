import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from rpptu.bnc import BranchAndCut, SolveConfig, select_leaf, solve
from rpptu.generator import GenConfig, generate
from rpptu.graph import build_instance
from rpptu.lp import solve_lp
from rpptu.oracle import oracle_optimum
from rpptu.replicated import build
from rpptu.spatial import assemble

from conftest import two_service_instance, triangle_instance

INF = math.inf


def two_loops(num_agents=2):
    arcs = [("sa", "0", "1", 5, True), ("da", "0", "1", 5, False), ("ra", "1", "0", 5, False),
            ("sb", "0", "2", 5, True), ("db", "0", "2", 5, False), ("rb", "2", "0", 5, False)]
    return build_instance(["0", "1", "2"], arcs, "0", num_agents=num_agents, name="two_loops")


def root_children(inst, **kw):
    bc = BranchAndCut(inst, SolveConfig(**kw))
    root = bc.root()
    x = solve_lp(assemble(bc.rg, root)).x
    del bc.queue[root.id]
    return bc, bc.branch(root, x), x


def test_root_children_counts():
    _, kids, _ = root_children(two_service_instance(2), symmetry=False, path_mode="fastest")
    assert len(kids) == 3
    _, kids, _ = root_children(two_service_instance(1), symmetry=False, path_mode="fastest")
    assert len(kids) == 2


def test_children_shrink_after_assignment():
    bc, kids, x = root_children(two_service_instance(2), symmetry=False, path_mode="fastest")
    child = next(c for c in kids if c.assigned())
    cx = solve_lp(assemble(bc.rg, child)).x
    assert len(bc.branch(child, cx)) == 2


def test_symmetry_merges_idle_agents():
    _, kids, _ = root_children(two_service_instance(2), path_mode="fastest")
    # one child per arc for the lowest idle agent; no retire child since work remains for nobody else
    assert len(kids) == 2


def test_select_leaf_rules():
    assert select_leaf({1: -INF, 2: 5.0}) == 1
    assert select_leaf({1: 5.0, 2: 5.0}) == 1
    assert select_leaf({3: INF, 4: INF}) is None
    assert select_leaf({}) is None


def test_single_arc_single_agent():
    inst = triangle_instance()
    res = solve(inst)
    assert res.status == "optimal"
    assert res.objective == oracle_optimum(inst)[0] == 6
    assert res.stats.max_depth <= 2


def test_waiting_counts_in_makespan():
    inst = triangle_instance(window=(0, 2))
    res = solve(inst)
    assert res.objective == oracle_optimum(inst)[0]


def test_appendix_matches_oracle():
    inst = two_service_instance()
    res = solve(inst)
    assert res.status == "optimal" and res.objective == oracle_optimum(inst)[0]
    assert res.fuel + res.gamma == res.objective


def test_shared_estimate_overshoots():
    inst = two_loops()
    rg = build(inst)
    best = oracle_optimum(inst)[0]
    assert best == 30
    shared = solve_lp(assemble(rg, per_agent_estimate=False)).objective
    own = solve_lp(assemble(rg)).objective
    assert shared > best
    assert own <= best + 1e-6
    assert solve(inst).objective == 30


def test_node_budget_reports_gap_or_optimal():
    inst = generate(GenConfig(num_vertices=6, arc_ratio=2.0, num_service=3, num_agents=2, seed=5,
                              window_model="random"))
    res = solve(inst, SolveConfig(node_budget=1))
    assert res.status in ("gap", "optimal", "infeasible")
    assert res.stats.nodes <= 1
    full = solve(inst)
    assert full.status == "optimal"
    if res.objective is not None:
        assert res.objective >= full.objective


def test_result_json_is_deterministic():
    inst = generate(GenConfig(num_vertices=5, arc_ratio=1.6, num_service=2, num_agents=2, seed=3,
                              window_model="random"))
    a, b = solve(inst).to_dict(inst), solve(inst).to_dict(inst)
    a["stats"].pop("wall_time")
    b["stats"].pop("wall_time")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), v=st.integers(4, 5), m=st.integers(1, 3), k=st.integers(1, 2))
def test_root_bound_below_oracle(seed, v, m, k):
    inst = generate(GenConfig(num_vertices=v, arc_ratio=1.6, num_service=m, num_agents=k, seed=seed,
                              window_model="random"))
    best = oracle_optimum(inst)[0]
    lb = solve_lp(assemble(build(inst))).objective
    assert lb <= best + 1e-6


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), mode=st.sampled_from(["pareto", "fastest"]),
       cuts=st.booleans(), sym=st.booleans())
def test_incumbent_never_below_oracle(seed, mode, cuts, sym):
    inst = generate(GenConfig(num_vertices=5, arc_ratio=1.6, num_service=2, num_agents=2, seed=seed,
                              window_model="random"))
    best = oracle_optimum(inst)[0]
    res = solve(inst, SolveConfig(path_mode=mode, use_cuts=cuts, symmetry=sym))
    assert res.objective >= best
    assert res.trajectory.cost == res.objective
    if mode == "pareto":
        assert res.objective == best
