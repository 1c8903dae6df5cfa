"""Per-flow rate processes for background, client and bot traffic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .topology import Topology

KINDS = ("telnet", "dns", "csa", "voip", "quake3", "bot", "background1", "background2", "constant")
PROTOCOLS = ("tcp", "udp", "tcp_udp")
APP_KINDS = ("telnet", "dns", "csa", "voip", "quake3")
HOUR = 3600.0


@dataclass(frozen=True)
class TrafficModel:
    """Uniform packet-rate x uniform packet-size process.

    ``scale`` multiplies every draw; it lets a suite thin out the offered
    load without changing the shape of the process.
    """

    kind: str
    pkt_size_min: float
    pkt_size_max: float
    rate_min: float
    rate_max: float
    protocol: str = "tcp"
    duration: float = HOUR
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown traffic kind {self.kind!r}")
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if not 0 <= self.pkt_size_min <= self.pkt_size_max:
            raise ValueError(f"{self.kind}: need 0 <= pkt_size_min <= pkt_size_max")
        if not 0 <= self.rate_min <= self.rate_max:
            raise ValueError(f"{self.kind}: need 0 <= rate_min <= rate_max")
        if self.duration <= 0:
            raise ValueError(f"{self.kind}: duration must be positive")
        if self.scale < 0:
            raise ValueError(f"{self.kind}: scale must be non-negative")

    @property
    def mean_bps(self) -> float:
        size = 0.5 * (self.pkt_size_min + self.pkt_size_max)
        rate = 0.5 * (self.rate_min + self.rate_max)
        return self.scale * rate * size * 8.0

    @property
    def max_bps(self) -> float:
        return self.scale * self.rate_max * self.pkt_size_max * 8.0

    @classmethod
    def constant(cls, bps: float, duration: float = HOUR) -> TrafficModel:
        # 1000-byte packets at a fixed packet rate
        pps = bps / 8000.0
        return cls("constant", 1000.0, 1000.0, pps, pps, "udp", duration)


def _app(kind, size, rate, protocol, mean_bps):
    base = TrafficModel(kind, size[0], size[1], rate[0], rate[1], protocol)
    return replace(base, scale=mean_bps / base.mean_bps)


# Mean rates of the five application models are declared defaults (bps).
APP_MEAN_BPS = {"telnet": 2e3, "dns": 1e3, "csa": 40e3, "voip": 30e3, "quake3": 50e3}

MODELS: dict[str, TrafficModel] = {
    "telnet": _app("telnet", (20, 140), (1.0, 5.25), "tcp", APP_MEAN_BPS["telnet"]),
    "dns": _app("dns", (60, 190), (0.5, 1.5), "tcp_udp", APP_MEAN_BPS["dns"]),
    "csa": _app("csa", (80, 120), (25, 75), "udp", APP_MEAN_BPS["csa"]),
    "voip": _app("voip", (160, 240), (15, 22.5), "udp", APP_MEAN_BPS["voip"]),
    "quake3": _app("quake3", (50, 200), (25, 75), "udp", APP_MEAN_BPS["quake3"]),
    "bot": TrafficModel("bot", 100, 2000, 15, 200, "tcp", 300.0),
    "background1": TrafficModel("background1", 50, 1000, 1, 80, "tcp"),
    "background2": TrafficModel("background2", 10, 2500, 1, 80, "tcp"),
}

HOST_KINDS = APP_KINDS + ("background1", "background2")


@dataclass(frozen=True)
class RampProfile:
    """Scheduled rate of a flow.

    ``linear`` interpolates from ``r_start`` to ``r_end`` over
    ``ramp_duration`` seconds and then holds ``r_end``; ``none`` holds
    ``r_end`` from the first second.
    """

    shape: str = "none"
    r_start: float = 0.0
    r_end: float = 0.0
    ramp_duration: float = 0.0

    def __post_init__(self):
        if self.shape not in ("none", "linear"):
            raise ValueError(f"unknown ramp shape {self.shape!r}")
        if self.shape == "linear" and not (
            self.ramp_duration > 0 and self.r_end >= self.r_start >= 0
        ):
            raise ValueError("linear ramp needs ramp_duration > 0 and r_end >= r_start >= 0")
        if self.r_end < 0:
            raise ValueError("ramp rates must be non-negative")

    def scaled(self, factor: float) -> RampProfile:
        return replace(self, r_start=self.r_start * factor, r_end=self.r_end * factor)

    def at(self, elapsed):
        elapsed = np.asarray(elapsed, dtype=float)
        if self.shape == "none":
            return np.full(elapsed.shape, self.r_end)
        frac = np.clip(elapsed / self.ramp_duration, 0.0, 1.0)
        return self.r_start + (self.r_end - self.r_start) * frac


@dataclass(frozen=True)
class FlowSpec:
    """A source-to-destination rate process.

    Without a ramp the flow draws its rate from ``model`` every tick; with
    one, the ramp is the rate. ``duration`` overrides ``model.duration``.
    A tuple ``dst`` fans the flow out: each destination gets an equal share
    of the same rate process.
    """

    src: str
    dst: str | tuple[str, ...]
    model: TrafficModel
    start_offset: float = 0.0
    ramp: RampProfile | None = None
    seed: int = 0
    attack: bool = False
    duration: float | None = None

    def __post_init__(self):
        if self.start_offset < 0:
            raise ValueError("start_offset must be non-negative")
        if self.duration is not None and self.duration <= 0:
            raise ValueError("duration must be positive")

    @property
    def destinations(self) -> tuple[str, ...]:
        return self.dst if isinstance(self.dst, tuple) else (self.dst,)

    @property
    def active_duration(self) -> float:
        return self.model.duration if self.duration is None else self.duration

    @property
    def end(self) -> float:
        return self.start_offset + self.active_duration

    @property
    def mean_bps(self) -> float:
        """Long-run rate while active (ramp flows: the held rate)."""
        return self.model.mean_bps if self.ramp is None else self.ramp.r_end


def rate_trajectory(flow: FlowSpec, n_ticks: int, tick: float = 1.0) -> np.ndarray:
    """Rates of ``flow`` at ``t = 0, tick, ..., (n_ticks - 1) * tick``.

    Tick ``k`` always consumes the same two uniforms of the flow's stream,
    so a prefix of a longer trajectory equals a shorter one.
    """
    t = np.arange(n_ticks) * tick
    active = (t >= flow.start_offset) & (t < flow.end)
    if flow.ramp is not None:
        rates = flow.ramp.at(t - flow.start_offset)
    else:
        m = flow.model
        u = np.random.default_rng(flow.seed).random((n_ticks, 2))
        pps = m.rate_min + (m.rate_max - m.rate_min) * u[:, 0]
        size = m.pkt_size_min + (m.pkt_size_max - m.pkt_size_min) * u[:, 1]
        rates = m.scale * pps * size * 8.0
    if flow.model.kind == "bot":
        rates = np.minimum(rates, flow.model.rate_max * flow.model.pkt_size_max * 8.0)
    return np.where(active, rates, 0.0)


def rate_at(flow: FlowSpec, t: float, tick: float = 1.0) -> float:
    """Rate of ``flow`` (bits/s) at time ``t``; deterministic in ``(flow.seed, t)``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    k = int(math.floor(t / tick + 1e-9))
    return float(rate_trajectory(flow, k + 1, tick)[k])


@dataclass
class TrafficConfig:
    """Knobs for the background suite.

    ``host_scale`` thins the host models so twenty hosts leave room on a
    2 Mbps target link; the generator scales size the extra traffic that
    leaf and injection generators push toward the decoys.
    """

    enabled: list[str] = field(default_factory=lambda: list(HOST_KINDS))
    app_mean_bps: dict[str, float] = field(default_factory=lambda: dict(APP_MEAN_BPS))
    host_scale: float = 0.07
    generator_model: str = "background1"
    generator_scale: float = 3.0
    injection_scale: float = 0.0
    generators: bool = True

    def model(self, kind: str) -> TrafficModel:
        m = MODELS[kind]
        if kind in APP_KINDS and self.app_mean_bps.get(kind, APP_MEAN_BPS[kind]) != APP_MEAN_BPS[kind]:
            m = replace(m, scale=m.scale * self.app_mean_bps[kind] / APP_MEAN_BPS[kind])
        return m


def flow_seeds(seed: int, n: int, stream: int = 0) -> list[int]:
    state = np.random.SeedSequence([int(seed), int(stream)]).generate_state(max(n, 1), dtype=np.uint64)
    return [int(s) for s in state[:n]]


def make_background_suite(
    topology: Topology,
    config: TrafficConfig | None = None,
    seed: int = 0,
    duration: float = HOUR,
) -> list[FlowSpec]:
    """Normal traffic for one run.

    Every bot and client emits each enabled host model toward a decoy
    (decoys dealt round-robin over a seeded permutation). Each leaf
    generator sends one flow fanned out over the decoys of its leaf, and
    the injection generator one flow fanned out over all decoys.
    """
    config = config or TrafficConfig()
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 1]))
    decoys = topology.decoys
    order = [decoys[i] for i in rng.permutation(len(decoys))]

    specs: list[tuple[str, str, TrafficModel]] = []
    senders = topology.bots + topology.clients
    kinds = [k for k in HOST_KINDS if k in config.enabled]
    i = 0
    for host in senders:
        for kind in kinds:
            m = config.model(kind)
            m = replace(m, scale=m.scale * config.host_scale, duration=duration)
            specs.append((host, order[i % len(order)], m))
            i += 1

    if config.generators:
        gen = MODELS[config.generator_model]
        leaf_model = replace(gen, scale=gen.scale * config.generator_scale, duration=duration)
        inj_model = replace(gen, scale=gen.scale * config.injection_scale, duration=duration)
        if leaf_model.scale > 0:
            for leaf in topology.leaf_switches:
                specs.append((f"gen_{leaf}", tuple(topology.decoys_under(leaf)), leaf_model))
        if inj_model.scale > 0:
            specs.append(("gen_s6", tuple(decoys), inj_model))

    seeds = flow_seeds(seed, len(specs), stream=2)
    return [FlowSpec(src, dst, m, seed=s) for (src, dst, m), s in zip(specs, seeds)]
