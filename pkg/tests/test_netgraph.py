import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nctomo.errors import GenerationError, UsageError
from nctomo.netgraph import (
    ConnectivityProfile,
    Edge,
    Network,
    check_profile,
    extended_set,
    flow_independent,
    flow_rank,
    min_cut,
    node_flow,
    random_network,
    source_flow_to,
)


def nx_graph(net, marked=()):
    """Split every edge at a midpoint so parallel edges survive in a DiGraph."""
    g = nx.DiGraph()
    for e in net.edges:
        mid = ("mid", e)
        g.add_edge(e.tail, mid, capacity=1)
        g.add_edge(mid, e.head, capacity=1)
    return g


def nx_flow_rank(net, edge_set):
    g = nx_graph(net)
    for e in edge_set:
        g.add_edge("SUPER", ("mid", Edge(*e)), capacity=1)
    return nx.maximum_flow_value(g, "SUPER", net.receiver) if edge_set else 0


def nx_source_flow(net, edge_set):
    g = nx_graph(net)
    for e in edge_set:
        g.add_edge(("mid", Edge(*e)), "SINK", capacity=1)
    return nx.maximum_flow_value(g, net.source, "SINK") if edge_set else 0


def test_toy_structure(toy):
    net, _ = toy
    assert min_cut(net) == 2 and net.capacity == 2
    assert net.topo_order == ("s", "u", "r")
    assert [e.label for e in net.in_edges("r")] == ["u:r:0", "u:r:1"]
    assert net.validate() == []


def test_text_round_trip(toy):
    net, _ = toy
    again = Network.from_text(net.to_text())
    assert again == net and again.to_text() == net.to_text()


def test_rejects_bad_graphs():
    with pytest.raises(UsageError):
        Network(["s", "r"], [("s", "x")], "s", "r")
    with pytest.raises(UsageError):
        Network(["s", "r"], [("s", "s")], "s", "r")
    with pytest.raises(UsageError):
        Network(["s", "r"], [("s", "r", 0), ("s", "r", 0)], "s", "r")
    with pytest.raises(UsageError):
        Network(["s", "a", "b", "r"], [("s", "a"), ("a", "b"), ("b", "a"), ("b", "r")], "s", "r")
    with pytest.raises(UsageError):
        Edge.parse("a:b:c:d")


def test_validate_reports_dead_ends():
    net = Network(["s", "a", "b", "r"], [("s", "a"), ("s", "b"), ("a", "r")], "s", "r")
    assert net.validate()


def test_extended_set_example(two_path):
    net, _, (e1, e2, e3, e4, e5) = two_path
    # e5 carries everything that e2 and e3 carry into the receiver
    assert extended_set(net, [e5]) >= {e2, e3, e5}
    assert e4 not in extended_set(net, [e5])
    assert flow_rank(net, [e2, e3]) == 1
    assert flow_independent(net, [[e4], [e5]])
    assert not flow_independent(net, [[e2], [e3]])


def test_profiles():
    assert ConnectivityProfile.strong(1).min_out_degree == 3
    assert ConnectivityProfile.locate_adv(2).min_out_degree == 4
    with pytest.raises(UsageError):
        ConnectivityProfile.from_name("nope")


def test_impossible_generation():
    with pytest.raises(GenerationError):
        random_network(4, 1, ConnectivityProfile.strong(1), np.random.default_rng(0), max_tries=5)


nets = st.builds(
    lambda n, c, seed: random_network(n, c, ConnectivityProfile.weak(), np.random.default_rng(seed)),
    st.integers(3, 9),
    st.integers(2, 4),
    st.integers(0, 10_000),
)


@settings(max_examples=40, deadline=None)
@given(nets, st.data())
def test_flows_match_networkx(net, data):
    g = nx_graph(net)
    assert min_cut(net) == nx.maximum_flow_value(g, net.source, net.receiver)
    subset = data.draw(st.lists(st.sampled_from(net.edges), unique=True, max_size=5))
    assert flow_rank(net, subset) == nx_flow_rank(net, subset)
    assert source_flow_to(net, subset) == nx_source_flow(net, subset)
    v = data.draw(st.sampled_from(net.internal_nodes))
    assert node_flow(net, net.source, v) == nx.maximum_flow_value(g, net.source, v)


@settings(max_examples=25, deadline=None)
@given(nets, st.data())
def test_extended_set_order_independent(net, data):
    seed = data.draw(st.lists(st.sampled_from(net.edges), unique=True, min_size=1, max_size=3))
    perm = data.draw(st.permutations(net.edges))
    a, b = extended_set(net, seed), extended_set(net, seed, order=perm)
    assert a == b
    assert flow_rank(net, a) == flow_rank(net, seed)
    for e in net.edges:
        if e not in a:
            assert flow_rank(net, a | {e}) > flow_rank(net, seed)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(4, 10),
    st.integers(2, 4),
    st.sampled_from(["weak", "locate-adv"]),
    st.integers(0, 10_000),
)
def test_generator_postconditions(n, c, name, seed):
    profile = ConnectivityProfile.from_name(name, 1)
    try:
        net = random_network(n, c, profile, np.random.default_rng(seed))
    except GenerationError:
        return
    assert len(net.nodes) == n
    assert min_cut(net) == c == net.capacity
    assert net.validate() == []
    assert check_profile(net, profile)[0]
    assert nx.is_directed_acyclic_graph(nx_graph(net))
    again = random_network(n, c, profile, np.random.default_rng(seed))
    assert again.to_text() == net.to_text()


def test_strong_generation():
    profile = ConnectivityProfile.strong(1)
    net = random_network(8, 3, profile, np.random.default_rng(3))
    ok, bad = check_profile(net, profile)
    assert ok, bad
    for v in net.internal_nodes:
        assert node_flow(net, "s", v) >= 3 and node_flow(net, v, "r") >= 3
