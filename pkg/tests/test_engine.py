from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossfire.engine import (
    CSV_HEADER, Scenario, _hop_table, downstream_jump, expand_fanout, propagate, run,
)
from crossfire.topology import build_topology, links_at_level, route
from crossfire.traffic import MODELS, FlowSpec, RampProfile, TrafficModel


def const(src, dst, bps, start=0.0, duration=None, attack=False):
    return FlowSpec(src, dst, TrafficModel.constant(bps), start_offset=start, duration=duration,
                    attack=attack)


def test_single_flow_arithmetic(topo4):
    s = run(Scenario(topo4, [const("client1", "decoy1", 1e6)], sim_duration=60))
    on_path = {lk.id for lk in route(topo4, "client1", "decoy1")}
    for lid in s.link_ids:
        expect = 0.5 if lid in on_path else 0.0
        assert np.allclose(s.utilization_of(lid), expect)
    assert set(s.labels) == {"normal"}


def test_ten_bots_saturate_target(topo4):
    flows = [const(b, d, 0.25e6, attack=True) for b, d in zip(topo4.bots, topo4.decoys)]
    s = run(Scenario(topo4, flows, sim_duration=60))
    assert np.allclose(s.utilization_of(topo4.target_link), 1.0)
    assert np.allclose(s.offered_of(topo4.target_link), 2.5e6)
    # first poll instant already saturated
    assert s.warmup == (5.0, 5.0)


def test_downstream_gets_clipped_share(topo4):
    flows = [const(b, d, 0.25e6, attack=True) for b, d in zip(topo4.bots, topo4.decoys)]
    s = run(Scenario(topo4, flows, sim_duration=30))
    edge = topo4.edge_link(topo4.decoys[0]).id
    assert np.allclose(s.offered_of(edge), 0.2e6)
    ups = [lk.id for lk in links_at_level(topo4, 1)]
    assert np.allclose(sum(s.offered_of(u) for u in ups), 2e6)


def test_conservation_at_split_per_tick(topo4):
    rng = np.random.default_rng(0)
    legs = [(b, d) for b in topo4.bots for d in topo4.decoys[::3]]
    rates = rng.uniform(0, 30e3, (len(legs), 50))
    hops, rows = _hop_table(topo4, legs)
    cap = np.array([lk.capacity for lk in topo4.links])
    arriving = propagate(rates, hops, cap)
    target_row = rows[topo4.target_link]
    pos = np.argmax(hops == target_row, axis=1)
    at_target = arriving[np.arange(len(legs)), pos].sum(axis=0)
    after = arriving[np.arange(len(legs)), pos + 1].sum(axis=0)
    assert np.allclose(after, np.minimum(at_target, cap[target_row]))
    assert (at_target > cap[target_row]).any()


def test_fanout_splits_evenly(topo4):
    owner, legs, share = expand_fanout([const("gen_s8", ("decoy1", "decoy2"), 1000.0)])
    assert owner == [0, 0] and np.allclose(share, 0.5)
    s = run(Scenario(topo4, [const("gen_s8", tuple(topo4.decoys_under("s8")), 1e4)],
                     sim_duration=10))
    assert np.allclose(s.offered_of(topo4.edge_link("decoy3").id), 1e3)


def test_tick_must_divide_poll(topo4):
    with pytest.raises(ValueError, match="divide"):
        Scenario(topo4, [], tick=2, poll_interval=5)
    with pytest.raises(ValueError):
        Scenario(topo4, [], sim_duration=2)


def test_labels_follow_target_timeline(topo4):
    flows = [const("client1", "decoy1", 1.5e6)]
    flows += [const("bot1", "decoy2", 0.3e6, start=100, attack=True),
              const("bot2", "decoy3", 0.3e6, start=200, attack=True)]
    s = run(Scenario(topo4, flows, sim_duration=300))
    assert s.warmup == (105.0, 205.0)
    lab = dict(zip(s.times, s.labels))
    assert lab[100.0] == "normal" and lab[105.0] == "warmup"
    assert lab[200.0] == "warmup" and lab[205.0] == "attack"


def test_poll_is_trailing_mean(topo4):
    f = FlowSpec("client1", "decoy1", MODELS["bot"], ramp=RampProfile("linear", 0, 5e5, 10),
                 duration=1000)
    s = run(Scenario(topo4, [f], sim_duration=20))
    # ticks 0..4 carry 0, 5e4, ..., 2e5
    assert s.offered_of(topo4.target_link)[0] == pytest.approx(1e5)


def test_csv_format(topo4):
    s = run(Scenario(topo4, [const("client1", "decoy1", 1e6)], sim_duration=10))
    lines = s.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 2 * len(topo4.links)
    row = lines[1].split(",")
    assert len(row[3].split(".")[1]) == 6
    assert row[5] == "normal"


def test_jump(topo4):
    flows = [const("client1", "decoy1", 2e5), const("bot1", "decoy5", 4e5, start=100, attack=True)]
    s = run(Scenario(topo4, flows, sim_duration=200))
    edge5 = topo4.edge_link("decoy5").id
    assert downstream_jump(s, edge5, (100, 200)) == pytest.approx(0.2)
    assert downstream_jump(s, topo4.edge_link("decoy1").id, (100, 200)) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        downstream_jump(s, edge5, (100, 400))


def test_jump_level1_matches_branch_arithmetic():
    t = build_topology(2)
    flows = [const(b, d, 0.25e6, start=50, attack=True) for b, d in zip(t.bots, t.decoys[::2])]
    s = run(Scenario(t, flows, sim_duration=150))
    ups = [lk.id for lk in links_at_level(t, 1)]
    for u in ups:
        # 2 Mbps clipped at the target, split over two branches
        assert downstream_jump(s, u, (50, 150)) == pytest.approx(0.5)


@st.composite
def light_flows(draw):
    t = build_topology(2)
    n = draw(st.integers(1, 6))
    out = []
    for i in range(n):
        src = draw(st.sampled_from(t.bots + t.clients))
        dst = draw(st.sampled_from(t.decoys))
        # peak rates small enough that no tick saturates any link
        model = replace(MODELS[draw(st.sampled_from(["background1", "background2"]))], scale=0.1)
        out.append(FlowSpec(src, dst, model, seed=draw(st.integers(0, 999)),
                            start_offset=draw(st.sampled_from([0.0, 20.0]))))
    return t, out


@given(light_flows(), st.integers(0, 999))
def test_adding_a_flow_never_lowers_load_below_saturation(tf, seed):
    t, flows = tf
    extra = FlowSpec("client5", t.decoys[-1], replace(MODELS["background2"], scale=0.1), seed=seed)
    a = run(Scenario(t, flows, sim_duration=60))
    b = run(Scenario(t, flows + [extra], sim_duration=60))
    assert (a.utilization < 1).all()
    assert (b.offered >= a.offered - 1e-9).all()


@given(light_flows())
def test_bounds_and_determinism(tf):
    t, flows = tf
    heavy = flows + [const(b, t.decoys[0], 4e5, attack=True) for b in t.bots[:6]]
    a = run(Scenario(t, heavy, sim_duration=60))
    b = run(Scenario(t, heavy, sim_duration=60))
    assert ((a.utilization >= 0) & (a.utilization <= 1)).all()
    assert (a.flow_count >= 0).all()
    assert a.to_csv() == b.to_csv()
    cap = a.capacity[:, None]
    assert np.allclose(a.utilization, np.minimum(a.offered, cap) / cap)
