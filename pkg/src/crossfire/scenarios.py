"""Assemble runnable scenarios from a ``ScenarioConfig``."""

from __future__ import annotations

from dataclasses import replace
from functools import lru_cache

import numpy as np

from .attack import (AttackPlan, attack_budget, even_assignment, full_assignment, rolling_flows,
                     schedule_bots)
from .config import ScenarioConfig
from .engine import LinkSampleSeries, Scenario, run
from .topology import Topology, build_topology, links_at_level, route
from .traffic import RampProfile, TrafficConfig, make_background_suite


def topology_from(cfg: ScenarioConfig, n_subtrees: int | None = None) -> Topology:
    t = cfg.topology
    overrides = {int(k): v for k, v in t.link_overrides.items()}
    return _cached_topology(n_subtrees or t.n_subtrees, t.capacity, t.delay,
                            tuple(sorted((k, tuple(sorted(v.items()))) for k, v in overrides.items())))


@lru_cache(maxsize=32)
def _cached_topology(n, capacity, delay, overrides):
    return build_topology(n, capacity, delay, {k: dict(v) for k, v in overrides})


def traffic_config(cfg: ScenarioConfig) -> TrafficConfig:
    tr = cfg.traffic
    return TrafficConfig(
        enabled=list(tr.enabled),
        app_mean_bps=dict(tr.app_mean_bps),
        host_scale=tr.host_scale,
        generator_model=tr.generator_model,
        generator_scale=tr.generator_scale,
        injection_scale=tr.injection_scale,
        generators=tr.generators,
    )


def normal_load_on(topology: Topology, flows, link_id: int) -> float:
    """Long-run mean of the normal traffic routed over ``link_id``."""
    total = 0.0
    for f in flows:
        if f.attack:
            continue
        dsts = f.destinations
        hits = sum(any(lk.id == link_id for lk in route(topology, f.src, d)) for d in dsts)
        total += f.mean_bps * hits / len(dsts)
    return total


def attack_plan(cfg: ScenarioConfig, topology: Topology, background, bs=None, dur=None) -> AttackPlan:
    a = cfg.attack
    bots = topology.bots
    decoys = topology.decoys
    assign = full_assignment(bots, decoys) if a.assignment == "all" else even_assignment(bots, decoys)
    if a.rate_mode == "budget":
        target = topology.link(topology.target_link)
        full = attack_budget(normal_load_on(topology, background, target.id), target.capacity,
                             len(bots), a.overprovision)
        start = a.ramp_from * full
    else:
        # every decoy sees per_decoy_bps once all of its bots are running
        bots_per_decoy = sum(len(v) for v in assign.values()) / len(decoys)
        per_flow = np.asarray(a.per_decoy_bps, dtype=float) / bots_per_decoy
        share = len(next(iter(assign.values())))
        start, full = per_flow * share
    ramp = (RampProfile("linear", start, full, a.ramp_duration) if a.ramp == "linear"
            else RampProfile("none", full, full))
    return AttackPlan(
        target_links=(topology.target_link,),
        bots=tuple(bots),
        decoy_assignment=assign,
        bs=a.bs if bs is None else bs,
        dur=a.dur if dur is None else dur,
        per_bot_rate=ramp,
        attack_start=a.attack_start,
        rolling_period=a.rolling_period,
    )


def build_scenario(cfg: ScenarioConfig, seed: int, n_subtrees=None, bs=None, dur=None,
                   attack=None) -> Scenario:
    topo = topology_from(cfg, n_subtrees)
    background = make_background_suite(topo, traffic_config(cfg), seed, duration=cfg.sim.duration)
    use_attack = cfg.attack.enabled if attack is None else attack
    plan = attack_plan(cfg, topo, background, bs, dur) if use_attack else None
    flows = background + (bot_flows(cfg, topo, plan, seed) if plan else [])
    return Scenario(
        topology=topo,
        flows=flows,
        attack_plan=plan,
        sim_duration=cfg.sim.duration,
        tick=cfg.monitor.tick,
        poll_interval=cfg.monitor.poll_interval,
        seed=seed,
        saturation_threshold=cfg.sim.saturation_threshold,
    )


def target_sets(cfg: ScenarioConfig, topology: Topology) -> list[list[int]]:
    if cfg.attack.target_sets:
        return [list(x) for x in cfg.attack.target_sets]
    ups = [lk.id for lk in links_at_level(topology, 1)]
    half = max(1, len(ups) // 2)
    return [ups[:half], ups[half:]] if len(ups) > 1 else [ups, [topology.target_link]]


def bot_flows(cfg: ScenarioConfig, topology: Topology, plan: AttackPlan, seed: int):
    if plan.rolling_period is None:
        return schedule_bots(plan, seed)
    return rolling_flows(plan, topology, target_sets(cfg, topology), cfg.sim.duration, seed)


_RUN_CACHE: dict = {}


def simulate(cfg: ScenarioConfig, seed: int, **kw) -> LinkSampleSeries:
    """``run(build_scenario(...))`` memoized on the config content."""
    key = (cfg.to_yaml(), int(seed), tuple(sorted(kw.items())))
    hit = _RUN_CACHE.get(key)
    if hit is None:
        if len(_RUN_CACHE) > 256:
            _RUN_CACHE.clear()
        hit = _RUN_CACHE[key] = run(build_scenario(cfg, seed, **kw))
    return hit


def monitored_links(cfg: ScenarioConfig, topology: Topology) -> list[int]:
    if cfg.monitor.links == "decoy_edges":
        return [lk.id for lk in links_at_level(topology, 2)]
    return [int(x) for x in cfg.monitor.links]


def with_overrides(cfg: ScenarioConfig, **sections) -> ScenarioConfig:
    """Copy of ``cfg`` with ``section={field: value}`` replacements."""
    out = cfg
    for name, fields in sections.items():
        out = replace(out, **{name: replace(getattr(out, name), **fields)})
    return out
