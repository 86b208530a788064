import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from rpptu.bnc import SolveConfig
from rpptu.generator import GenConfig, batch_csv, generate, round_half_up, run_batch
from rpptu.graph import dumps_instance, instance_from_dict


def base_arcs(inst):
    return [a for a in inst.graph.arcs if not a.id.endswith("d")]


def test_twenty_vertex_cell():
    cfg = GenConfig(num_vertices=20, arc_ratio=1.2, beta=0.3, seed=4)
    assert cfg.num_arcs == 24 and cfg.service_count == 7
    inst = generate(cfg)
    assert len(base_arcs(inst)) == 24
    assert len(inst.graph.service_arcs) == 7


def test_same_seed_same_bytes():
    cfg = GenConfig(num_vertices=20, arc_ratio=1.2, beta=0.3, seed=7)
    assert dumps_instance(generate(cfg)) == dumps_instance(generate(cfg))
    assert dumps_instance(generate(cfg)) != dumps_instance(generate(GenConfig(seed=8)))


def test_rounding_is_half_up():
    assert round_half_up(2.5) == 3 and round_half_up(7.2) == 7 and round_half_up(0.5) == 1


def test_bad_configs():
    with pytest.raises(ValueError):
        GenConfig(num_vertices=10, arc_ratio=0.5)
    with pytest.raises(ValueError):
        GenConfig(window_model="fog")


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000), v=st.integers(3, 14), ratio=st.sampled_from([1.2, 1.6, 2.0]),
       beta=st.sampled_from([0.3, 0.5, 0.7]))
def test_generated_instances_validate(seed, v, ratio, beta):
    cfg = GenConfig(num_vertices=v, arc_ratio=ratio, beta=beta, seed=seed)
    inst = generate(cfg)
    again = instance_from_dict(inst.to_dict())
    assert dumps_instance(again) == dumps_instance(inst)
    g = inst.graph
    assert len(g.service_arcs) == cfg.service_count
    base = base_arcs(inst)
    assert len(base) == cfg.num_arcs
    # the first |V| arcs form a Hamiltonian cycle
    cyc = nx.DiGraph([(a.tail, a.head) for a in base[:v]])
    assert nx.is_strongly_connected(cyc) and cyc.number_of_nodes() == v
    cycle_ids = {a.id for a in base[:v]} | {a.id + "d" for a in base[:v]}
    for q in inst.calendar.windows:
        assert g.arcs[q].id in cycle_ids
    for a in g.arcs:
        if a.id.endswith("d"):
            twin = g.arcs[g.arc_index(a.id[:-1])]
            assert twin.service and (twin.tail, twin.head, twin.weight) == (a.tail, a.head, a.weight)
            assert inst.calendar.of(g.arc_index(a.id)) == inst.calendar.of(g.arc_index(twin.id))


def test_small_cell_is_valid():
    inst = generate(GenConfig(num_vertices=5, arc_ratio=1.2, beta=0.5, seed=1))
    assert inst.graph.num_vertices == 5


def test_empty_batch():
    assert run_batch([GenConfig(num_vertices=5)], 0) == []
    assert batch_csv([]) == "beta,V,A,variant,OPT,NODES,TIME_s,nCP\n"


def test_budget_one_keeps_all_rows():
    cfgs = [GenConfig(num_vertices=6, arc_ratio=1.6, beta=0.5, window_model="random")]
    rows = run_batch(cfgs, 3, SolveConfig(node_budget=1))
    assert [r.variant for r in rows] == ["cuts", "nocuts"]
    assert all(r.instances == 3 and r.OPT <= 3 for r in rows)
    assert all(r.NODES <= 1 for r in rows)
    lines = batch_csv(rows).splitlines()
    assert len(lines) == 3 and lines[1].startswith("0.5,6,10,cuts,")
