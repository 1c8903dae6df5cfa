"""Bot coordination: target ranking, start offsets, rolling targets, warm-up."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from .engine import SATURATION_THRESHOLD, LinkSampleSeries, warmup_window
from .topology import Topology, route
from .traffic import MODELS, FlowSpec, RampProfile, TrafficModel, flow_seeds

ROLLING_PERIOD = 180.0


@dataclass(frozen=True)
class WarmupWindow:
    t_first_bot: float
    t_link_down: float

    def __post_init__(self):
        if self.t_link_down < self.t_first_bot:
            raise ValueError("t_link_down precedes t_first_bot")

    @property
    def length(self) -> float:
        return self.t_link_down - self.t_first_bot


@dataclass(frozen=True)
class AttackPlan:
    """What the botmaster orders.

    ``per_bot_rate`` is a bot's total rate; it is split evenly over the
    bot's assigned decoys.
    """

    target_links: tuple[int, ...]
    bots: tuple[str, ...]
    decoy_assignment: dict[str, tuple[str, ...]]
    bs: float = 0.0
    dur: float = 300.0
    per_bot_rate: RampProfile = field(default_factory=RampProfile)
    attack_start: float = 300.0
    rolling_period: float | None = None
    model: TrafficModel = MODELS["bot"]

    def __post_init__(self):
        if self.bs < 0:
            raise ValueError("bs must be non-negative")
        if self.dur <= 0:
            raise ValueError("dur must be positive")
        if self.attack_start < 0:
            raise ValueError("attack_start must be non-negative")
        if not self.bots:
            raise ValueError("attack plan needs at least one bot")
        missing = [b for b in self.bots if not self.decoy_assignment.get(b)]
        if missing:
            raise ValueError(f"bots without decoys: {missing}")

    def check_reachable(self, topology: Topology) -> None:
        targets = set(self.target_links)
        for bot, decoys in self.decoy_assignment.items():
            for d in decoys:
                if not targets & {link.id for link in route(topology, bot, d)}:
                    raise ValueError(f"decoy {d} not reached from {bot} through a target link")


def even_assignment(bots, decoys) -> dict[str, tuple[str, ...]]:
    """Deal decoys to bots round-robin so every decoy has one bot."""
    out: dict[str, list[str]] = {b: [] for b in bots}
    for i, d in enumerate(decoys):
        out[bots[i % len(bots)]].append(d)
    return {b: tuple(ds) for b, ds in out.items()}


def full_assignment(bots, decoys) -> dict[str, tuple[str, ...]]:
    """Every bot spreads over every decoy."""
    return {b: tuple(decoys) for b in bots}


def select_target_links(topology: Topology, bots, decoys, k: int) -> list[int]:
    """The ``k`` links crossed by the most distinct bot-to-decoy routes."""
    if not bots or not decoys:
        raise ValueError("need at least one bot and one decoy")
    if k < 1 or k > len(topology.links):
        raise ValueError(f"k must be in [1, {len(topology.links)}], got {k}")
    counts: Counter[int] = Counter()
    for b in bots:
        for d in decoys:
            counts.update(link.id for link in route(topology, b, d))
    ranked = sorted(counts, key=lambda lid: (-counts[lid], lid))
    if k > len(ranked):
        raise ValueError(f"only {len(ranked)} links carry bot routes, asked for {k}")
    return ranked[:k]


def bot_offsets(plan: AttackPlan, seed: int) -> dict[str, float]:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7]))
    draws = rng.uniform(0.0, plan.bs, len(plan.bots)) if plan.bs > 0 else np.zeros(len(plan.bots))
    return {b: plan.attack_start + float(o) for b, o in zip(plan.bots, draws)}


def schedule_bots(plan: AttackPlan, seed: int) -> list[FlowSpec]:
    """One attack flow per (bot, assigned decoy), offset uniformly in ``[0, bs]``."""
    offsets = bot_offsets(plan, seed)
    pairs = [(b, d) for b in plan.bots for d in plan.decoy_assignment[b]]
    seeds = flow_seeds(seed, len(pairs), stream=3)
    flows = []
    for (b, d), s in zip(pairs, seeds):
        share = plan.per_bot_rate.scaled(1.0 / len(plan.decoy_assignment[b]))
        flows.append(FlowSpec(b, d, plan.model, offsets[b], share, s, attack=True, duration=plan.dur))
    return flows


def rolling_schedule(plan: AttackPlan, sets, sim_duration: float) -> list[tuple[float, float, int]]:
    """Round-robin activation ``(t_start, t_end, set_index)`` from ``attack_start``.

    Without a rolling period the first set stays active throughout.
    """
    sets = list(sets)
    if not sets:
        raise ValueError("need at least one target-link set")
    if plan.rolling_period is None:
        return [(plan.attack_start, sim_duration, 0)]
    if len(sets) < 2:
        raise ValueError("rolling needs at least two target-link sets")
    if plan.rolling_period <= 0:
        raise ValueError("rolling_period must be positive")
    n = int(math.ceil((sim_duration - plan.attack_start) / plan.rolling_period))
    out = []
    for i in range(max(n, 0)):
        t0 = plan.attack_start + i * plan.rolling_period
        out.append((t0, min(t0 + plan.rolling_period, sim_duration), i % len(sets)))
    return out


def rolling_flows(plan: AttackPlan, topology: Topology, sets, sim_duration: float, seed: int):
    """Bot flows retargeted at every switch instant.

    Each period restarts the synchronization spread and the ramp; bots
    aim only at decoys reached through the active set, and every flow
    stops at the switch instant.
    """
    timeline = rolling_schedule(plan, sets, sim_duration)
    flows: list[FlowSpec] = []
    for i, (t0, t1, idx) in enumerate(timeline):
        active = set(sets[idx])
        reachable = [
            d for d in topology.decoys
            if active & {link.id for link in route(topology, plan.bots[0], d)}
        ]
        if not reachable:
            raise ValueError(f"target set {sets[idx]} reaches no decoy")
        period = replace(
            plan,
            attack_start=t0,
            dur=min(plan.dur, t1 - t0),
            decoy_assignment=even_assignment(list(plan.bots), reachable),
            rolling_period=None,
        )
        period_flows = schedule_bots(period, seed=int(flow_seeds(seed, i + 1, stream=11)[i] % 2**32))
        flows.extend(replace(f, duration=min(f.active_duration, t1 - f.start_offset))
                     for f in period_flows if f.start_offset < t1)
    return flows


def measure_warmup(
    series: LinkSampleSeries, target_link: int, saturation_threshold: float = SATURATION_THRESHOLD
) -> WarmupWindow | None:
    r = series.row(target_link)
    window = warmup_window(series.times, series.attack_bps[r], series.utilization[r],
                           saturation_threshold)
    if window is None or window[1] is None:
        return None
    return WarmupWindow(*window)


def attack_budget(normal_bps: float, capacity: float, n_bots: int, overprovision: float) -> float:
    """Per-bot rate filling the target link's spare capacity times ``overprovision``."""
    spare = max(capacity - normal_bps, 0.0)
    return overprovision * spare / n_bots
