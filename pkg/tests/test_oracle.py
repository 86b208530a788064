import pytest

from rpptu.generator import GenConfig, generate
from rpptu.graph import build_instance
from rpptu.oracle import OracleLimitError, oracle_optimum


def cycle(window=None):
    arcs = [("a", "1", "2", 1, True), ("b", "2", "3", 1, False), ("c", "3", "1", 1, False),
            ("a2", "1", "2", 1, False)]
    wins = {"a": [window], "a2": [window]} if window else {}
    return build_instance(["1", "2", "3"], arcs, "1", windows=wins, horizon=10)


def test_plain_cycle():
    cost, tour = oracle_optimum(cycle())
    assert cost == 6 and tour.fuel == 3 and tour.gamma == 3


def test_cycle_with_forced_wait():
    cost, tour = oracle_optimum(cycle((0, 2)))
    assert cost == 8 and tour.gamma == 5


def test_size_limits():
    inst = generate(GenConfig(num_vertices=12, arc_ratio=1.6, beta=0.5))
    with pytest.raises(OracleLimitError):
        oracle_optimum(inst)


def test_second_agent_can_help():
    arcs = [("sa", "0", "1", 5, True), ("da", "0", "1", 5, False), ("ra", "1", "0", 5, False),
            ("sb", "0", "2", 5, True), ("db", "0", "2", 5, False), ("rb", "2", "0", 5, False)]
    one = build_instance(["0", "1", "2"], arcs, "0", num_agents=1)
    two = build_instance(["0", "1", "2"], arcs, "0", num_agents=2)
    assert oracle_optimum(one)[0] == 40
    cost, tour = oracle_optimum(two)
    assert cost == 30 and sorted(tour.finish) == [10, 10]
