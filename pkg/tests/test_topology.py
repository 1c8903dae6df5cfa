import json

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossfire.topology import Topology, build_topology, links_at_level, route


@pytest.mark.parametrize("n,switches,decoys", [(2, 9, 20), (4, 11, 40), (8, 15, 80)])
def test_table_counts(n, switches, decoys):
    t = build_topology(n, 2e6, 10)
    assert len(t.switches) == switches
    assert len(t.decoys) == decoys
    assert len(t.bots) == 10 and len(t.clients) == 10


def test_rejects_zero_subtrees():
    with pytest.raises(ValueError):
        build_topology(0)


@given(st.integers(1, 12))
def test_tree_shape(n):
    t = build_topology(n)
    g = nx.Graph()
    g.add_edges_from(lk.endpoints for lk in t.links)
    assert nx.is_tree(g)
    assert len(t.links) == g.number_of_nodes() - 1
    assert len(t.switches) == 7 + n
    for leaf in t.leaf_switches:
        assert len(t.decoys_under(leaf)) == 10
    gens = t.hosts_with_role("bg_generator")
    assert len(gens) == n + 1


def test_host_attachment(topo4):
    for h in topo4.hosts:
        if h.role == "bot":
            assert h.attach_switch in ("s1", "s2")
        elif h.role == "client":
            assert h.attach_switch in ("s3", "s4")
        elif h.role == "decoy":
            assert h.attach_switch in topo4.leaf_switches
    target = topo4.link(topo4.target_link)
    assert {target.endpoint_a, target.endpoint_b} == {"s5", "s7"}
    assert target.level == 0


def test_uniform_link_parameters_and_overrides():
    t = build_topology(2, 2e6, 10)
    assert {lk.capacity for lk in t.links} == {2e6}
    assert {lk.delay for lk in t.links} == {10.0}
    t2 = build_topology(2, overrides={0: {"capacity": 1e6}})
    assert t2.link(0).capacity == 1e6
    assert t2.link(1).capacity == 2e6


def test_route_examples(topo4):
    assert topo4.target_link in [lk.id for lk in route(topo4, "bot1", "decoy1")]
    assert route(topo4, "bot1", "bot1") == []
    path = route(topo4, "decoy1", "decoy2")
    assert len(path) == 2 and topo4.target_link not in [lk.id for lk in path]
    with pytest.raises(KeyError):
        route(topo4, "bot1", "nobody")


def test_route_matches_brute_force_path(topo4):
    g = nx.Graph()
    for lk in topo4.links:
        g.add_edge(lk.endpoint_a, lk.endpoint_b, id=lk.id)
    for src, dst in [("bot3", "decoy17"), ("client9", "decoy40"), ("decoy11", "decoy30")]:
        paths = list(nx.all_simple_paths(g, src, dst))
        assert len(paths) == 1
        expect = [g.edges[a, b]["id"] for a, b in zip(paths[0], paths[0][1:])]
        assert [lk.id for lk in route(topo4, src, dst)] == expect
        assert route(topo4, src, dst) == route(topo4, src, dst)


@given(st.sampled_from([2, 4, 8]), st.data())
def test_every_bot_decoy_route_crosses_target(n, data):
    t = build_topology(n)
    b = data.draw(st.sampled_from(t.bots + t.clients))
    d = data.draw(st.sampled_from(t.decoys))
    assert t.target_link in [lk.id for lk in route(t, b, d)]


def test_cut_property(topo4):
    g = nx.Graph()
    g.add_edges_from(lk.endpoints for lk in topo4.links if lk.id != topo4.target_link)
    comp = nx.node_connected_component(g, "bot1")
    assert not comp & set(topo4.decoys)
    assert set(topo4.clients) <= comp


def test_levels():
    t8 = build_topology(8)
    assert len(links_at_level(t8, 2)) == 80
    assert len(links_at_level(build_topology(4), 1)) == 4
    assert [lk.id for lk in links_at_level(build_topology(2), 0)] == [0]
    for lk in links_at_level(t8, 2):
        assert any(t8.host(h).role == "decoy" for h in lk.endpoints if h.startswith("decoy"))


def test_json_round_trip(topo4):
    text = topo4.to_json()
    back = Topology.from_dict(json.loads(text))
    assert back.to_json() == text
    assert back.target_link == topo4.target_link
