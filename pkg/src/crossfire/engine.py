"""Discrete-time fluid simulation of link loads with periodic polling."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .topology import Link, Topology, route
from .traffic import FlowSpec, rate_trajectory

LABELS = ("normal", "warmup", "attack")
SATURATION_THRESHOLD = 0.999
CSV_HEADER = ("t", "link_id", "offered_bps", "utilization", "flow_count", "label")


@dataclass
class Scenario:
    topology: Topology
    flows: list[FlowSpec]
    attack_plan: object | None = None
    sim_duration: float = 1800.0
    tick: float = 1.0
    poll_interval: float = 5.0
    seed: int = 0
    saturation_threshold: float = SATURATION_THRESHOLD

    def __post_init__(self):
        if self.tick <= 0 or self.poll_interval <= 0:
            raise ValueError("tick and poll_interval must be positive")
        ratio = self.poll_interval / self.tick
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"tick ({self.tick}) must divide poll_interval ({self.poll_interval})"
            )
        if self.sim_duration < self.poll_interval:
            raise ValueError("sim_duration must be at least one poll_interval")

    @property
    def ticks_per_poll(self) -> int:
        return int(round(self.poll_interval / self.tick))

    @property
    def n_polls(self) -> int:
        return int(math.floor(self.sim_duration / self.poll_interval + 1e-9))

    @property
    def target_link(self) -> int:
        plan = self.attack_plan
        if plan is not None and getattr(plan, "target_links", None):
            return plan.target_links[0]
        return self.topology.target_link


@dataclass(frozen=True)
class LinkSample:
    t: float
    link_id: int
    offered_load: float
    utilization: float
    flow_count: int
    label: str


@dataclass
class LinkSampleSeries:
    """Polled link statistics, stored column-wise.

    Arrays are indexed ``[link_row, poll]``; ``link_ids[row]`` names the
    link. ``attack_bps`` is the share of ``offered`` contributed by attack
    flows and backs the labels.
    """

    times: np.ndarray
    link_ids: list[int]
    capacity: np.ndarray
    offered: np.ndarray
    utilization: np.ndarray
    flow_count: np.ndarray
    attack_bps: np.ndarray
    labels: list[str]
    poll_interval: float
    target_link: int
    warmup: tuple[float, float | None] | None = None
    _rows: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self._rows = {lid: i for i, lid in enumerate(self.link_ids)}

    def row(self, link_id: int) -> int:
        try:
            return self._rows[link_id]
        except KeyError:
            raise KeyError(f"link {link_id!r} not in series") from None

    def utilization_of(self, link_id: int) -> np.ndarray:
        return self.utilization[self.row(link_id)]

    def offered_of(self, link_id: int) -> np.ndarray:
        return self.offered[self.row(link_id)]

    def bits(self, link_ids) -> np.ndarray:
        """Carried bits per poll interval, shape ``(len(link_ids), n_polls)``."""
        rows = [self.row(lid) for lid in link_ids]
        return self.utilization[rows] * self.capacity[rows, None] * self.poll_interval

    def samples(self, link_id: int) -> list[LinkSample]:
        r = self.row(link_id)
        return [
            LinkSample(float(t), link_id, float(self.offered[r, j]), float(self.utilization[r, j]),
                       int(self.flow_count[r, j]), self.labels[j])
            for j, t in enumerate(self.times)
        ]

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), newline="")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for j, t in enumerate(self.times):
            for r, lid in enumerate(self.link_ids):
                w.writerow([
                    f"{t:g}", lid, f"{self.offered[r, j]:.3f}",
                    f"{self.utilization[r, j]:.6f}", int(self.flow_count[r, j]), self.labels[j],
                ])
        return buf.getvalue()


def expand_fanout(flows: list[FlowSpec]) -> tuple[list[int], list[tuple[str, str]], np.ndarray]:
    """One leg per (flow, destination): owning flow index, endpoints, rate share."""
    owner, legs, share = [], [], []
    for i, f in enumerate(flows):
        dsts = f.destinations
        for d in dsts:
            owner.append(i)
            legs.append((f.src, d))
            share.append(1.0 / len(dsts))
    return owner, legs, np.array(share)


def _hop_table(topology: Topology, legs) -> tuple[np.ndarray, dict[int, int]]:
    paths = [route(topology, src, dst) for src, dst in legs]
    rows = {link.id: i for i, link in enumerate(topology.links)}
    n_hops = max((len(p) for p in paths), default=0)
    hops = np.full((len(legs), n_hops), -1, dtype=np.int64)
    for i, p in enumerate(paths):
        hops[i, : len(p)] = [rows[link.id] for link in p]
    return hops, rows


def propagate(rates: np.ndarray, hops: np.ndarray, capacity: np.ndarray):
    """Push source rates hop by hop through capacity-clipped links.

    ``rates`` is ``(n_flows, n_ticks)``; ``hops`` lists link rows per flow
    (-1 padded). A link whose arriving load exceeds capacity scales every
    crossing flow by ``capacity / load`` before the next hop. Returns the
    arriving rate of every flow at every hop, ``(n_flows, n_hops, n_ticks)``.
    """
    n_flows, n_hops = hops.shape
    n_links = capacity.shape[0]
    arriving = np.zeros((n_flows, n_hops, rates.shape[1]))
    if n_hops == 0:
        return arriving
    valid = hops >= 0
    flat = np.flatnonzero(valid.ravel())
    incidence = sparse.csr_matrix(
        (np.ones(flat.size), (hops.ravel()[flat], flat)), shape=(n_links, n_flows * n_hops)
    )
    arriving[:, 0] = rates
    for _ in range(n_hops):
        load = incidence @ arriving.reshape(n_flows * n_hops, -1)
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(load > capacity[:, None], capacity[:, None] / load, 1.0)
        for h in range(1, n_hops):
            prev = hops[:, h - 1]
            scale = factor[np.where(prev >= 0, prev, 0)]
            arriving[:, h] = np.where(valid[:, h, None], arriving[:, h - 1] * scale, 0.0)
    return arriving


def warmup_window(times, attack_bps, utilization, threshold=SATURATION_THRESHOLD):
    """``(t_first_bot, t_link_down)`` for one link, or ``None`` without attack load.

    ``t_link_down`` is ``None`` when the link never reaches ``threshold``.
    """
    hit = np.flatnonzero(attack_bps > 0)
    if hit.size == 0:
        return None
    first = hit[0]
    down = np.flatnonzero(utilization[first:] >= threshold)
    t_down = float(times[first + down[0]]) if down.size else None
    return float(times[first]), t_down


def assign_labels(times, attack_on_target, window) -> list[str]:
    """Poll-instant labels from the target link's attack timeline.

    Instants carrying attack load before saturation are ``warmup``; from
    saturation on they are ``attack``.
    """
    labels = []
    t_down = window[1] if window else None
    for t, a in zip(times, attack_on_target):
        if a <= 0:
            labels.append("normal")
        elif t_down is None or t < t_down:
            labels.append("warmup")
        else:
            labels.append("attack")
    return labels


def run(scenario: Scenario) -> LinkSampleSeries:
    topo = scenario.topology
    flows = scenario.flows
    k = scenario.ticks_per_poll
    n_polls = scenario.n_polls
    n_ticks = n_polls * k
    capacity = np.array([link.capacity for link in topo.links])
    n_links = len(topo.links)

    rates = np.array([rate_trajectory(f, n_ticks, scenario.tick) for f in flows]).reshape(
        len(flows), n_ticks
    )
    owner, legs, share = expand_fanout(flows)
    rates = rates[owner] * share[:, None]
    hops, _ = _hop_table(topo, legs)
    arriving = propagate(rates, hops, capacity)

    offered = np.zeros((n_links, n_ticks))
    attack = np.zeros((n_links, n_ticks))
    counts = np.zeros((n_links, n_ticks))
    is_attack = np.array([flows[i].attack for i in owner], dtype=bool)
    for h in range(hops.shape[1]):
        sel = hops[:, h] >= 0
        rows = hops[sel, h]
        a = arriving[sel, h]
        np.add.at(offered, rows, a)
        np.add.at(attack, rows, np.where(is_attack[sel, None], a, 0.0))
        np.add.at(counts, rows, (a > 0).astype(float))

    times = scenario.poll_interval * np.arange(1, n_polls + 1)
    shape = (n_links, n_polls, k)
    offered_p = offered.reshape(shape).mean(axis=2)
    # a poll reports its mean offered load; utilization follows from it
    util_p = np.minimum(offered_p, capacity[:, None]) / capacity[:, None]
    attack_p = attack.reshape(shape).mean(axis=2)
    count_p = counts.reshape(shape)[:, :, -1].astype(np.int64)

    target_row = [link.id for link in topo.links].index(scenario.target_link)
    window = warmup_window(times, attack_p[target_row], util_p[target_row],
                           scenario.saturation_threshold)
    labels = assign_labels(times, attack_p[target_row], window)
    return LinkSampleSeries(
        times=times,
        link_ids=[link.id for link in topo.links],
        capacity=capacity,
        offered=offered_p,
        utilization=util_p,
        flow_count=count_p,
        attack_bps=attack_p,
        labels=labels,
        poll_interval=scenario.poll_interval,
        target_link=scenario.target_link,
        warmup=window,
    )


def downstream_jump(series: LinkSampleSeries, link: int | Link, attack_window) -> float:
    """Mean utilization inside ``attack_window`` minus the mean before it.

    ``attack_window`` is ``(t_start, t_end)``; polls with ``t_start < t <=
    t_end`` count as attack, polls with ``t <= t_start`` as before.
    """
    link_id = link.id if isinstance(link, Link) else link
    t0, t1 = attack_window
    times = series.times
    if t0 < times[0] or t1 > times[-1] or t1 <= t0:
        raise ValueError(f"window {attack_window} outside series range [{times[0]}, {times[-1]}]")
    u = series.utilization_of(link_id)
    before = u[times <= t0]
    during = u[(times > t0) & (times <= t1)]
    if before.size == 0 or during.size == 0:
        raise ValueError(f"window {attack_window} leaves no samples before or during the attack")
    return float(during.mean() - before.mean())
