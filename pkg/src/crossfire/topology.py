"""Sub-tree test-bed topologies.

Wiring of an ``n``-sub-tree network::

    bots    -> s1, s2 --\\
                         s5 ==target== s7 -- s8 .. s(7+n) -- decoys
    clients -> s3, s4 --/               \\-- s6 (background injection)

Access switches 1-4 feed aggregation switch 5; the target link joins
switch 5 to the server-side root switch 7; every leaf switch hosts ten
decoy servers and one background generator.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from functools import cached_property

import networkx as nx

BOTS_PER_ACCESS = 5
CLIENTS_PER_ACCESS = 5
DECOYS_PER_LEAF = 10

ROLES = ("bot", "client", "decoy", "bg_generator")


@dataclass(frozen=True)
class Link:
    id: int
    endpoint_a: str
    endpoint_b: str
    capacity: float
    delay: float
    # 0 = target link, 1 = root->leaf, 2 = leaf->decoy; negative levels are
    # client side; None for background-injection attachments.
    level: int | None

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"link {self.id}: capacity must be positive")
        if self.delay < 0:
            raise ValueError(f"link {self.id}: delay must be non-negative")

    @property
    def endpoints(self) -> tuple[str, str]:
        return (self.endpoint_a, self.endpoint_b)


@dataclass(frozen=True)
class Host:
    id: str
    role: str
    attach_switch: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown host role {self.role!r}")


@dataclass(frozen=True)
class Topology:
    switches: tuple[str, ...]
    hosts: tuple[Host, ...]
    links: tuple[Link, ...]
    n_subtrees: int
    target_link: int
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @cached_property
    def _graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.switches)
        g.add_nodes_from(h.id for h in self.hosts)
        for link in self.links:
            g.add_edge(link.endpoint_a, link.endpoint_b, link_id=link.id)
        return g

    @cached_property
    def _link_by_id(self) -> dict[int, Link]:
        return {link.id: link for link in self.links}

    @cached_property
    def _host_by_id(self) -> dict[str, Host]:
        return {h.id: h for h in self.hosts}

    def link(self, link_id: int) -> Link:
        try:
            return self._link_by_id[link_id]
        except KeyError:
            raise KeyError(f"unknown link id {link_id!r}") from None

    def host(self, host_id: str) -> Host:
        try:
            return self._host_by_id[host_id]
        except KeyError:
            raise KeyError(f"unknown host id {host_id!r}") from None

    def hosts_with_role(self, role: str) -> list[Host]:
        return [h for h in self.hosts if h.role == role]

    @property
    def bots(self) -> list[str]:
        return [h.id for h in self.hosts_with_role("bot")]

    @property
    def clients(self) -> list[str]:
        return [h.id for h in self.hosts_with_role("client")]

    @property
    def decoys(self) -> list[str]:
        return [h.id for h in self.hosts_with_role("decoy")]

    @property
    def leaf_switches(self) -> list[str]:
        return [f"s{i}" for i in range(8, 8 + self.n_subtrees)]

    def edge_link(self, host_id: str) -> Link:
        """The access link of a host."""
        host = self.host(host_id)
        return self.link(self._graph.edges[host.id, host.attach_switch]["link_id"])

    def uplink(self, switch: str) -> Link:
        """The link joining a leaf switch to the root switch."""
        return self.link(self._graph.edges["s7", switch]["link_id"])

    def decoys_under(self, switch: str) -> list[str]:
        return [h.id for h in self.hosts_with_role("decoy") if h.attach_switch == switch]

    def to_dict(self) -> dict:
        return {
            "n_subtrees": self.n_subtrees,
            "target_link": self.target_link,
            "switches": list(self.switches),
            "hosts": [asdict(h) for h in self.hosts],
            "links": [asdict(link) for link in self.links],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> Topology:
        return cls(
            switches=tuple(data["switches"]),
            hosts=tuple(Host(**h) for h in data["hosts"]),
            links=tuple(Link(**link) for link in data["links"]),
            n_subtrees=data["n_subtrees"],
            target_link=data["target_link"],
        )


def build_topology(
    n_subtrees: int,
    capacity: float = 2e6,
    delay: float = 10.0,
    overrides: dict[int, dict] | None = None,
) -> Topology:
    """Build the canonical ``n_subtrees`` tree.

    ``overrides`` maps a link id to replacement ``capacity``/``delay`` values.
    """
    if int(n_subtrees) != n_subtrees or n_subtrees < 1:
        raise ValueError(f"n_subtrees must be a positive integer, got {n_subtrees!r}")
    n_subtrees = int(n_subtrees)
    overrides = overrides or {}

    switches = tuple(f"s{i}" for i in range(1, 8 + n_subtrees))
    leaves = [f"s{i}" for i in range(8, 8 + n_subtrees)]
    hosts: list[Host] = []
    edges: list[tuple[str, str, int | None]] = [("s5", "s7", 0)]
    edges += [(f"s{i}", "s5", -1) for i in range(1, 5)]
    edges += [("s7", leaf, 1) for leaf in leaves]
    edges.append(("s7", "s6", None))

    for i in range(2 * BOTS_PER_ACCESS):
        hosts.append(Host(f"bot{i + 1}", "bot", f"s{1 + i // BOTS_PER_ACCESS}"))
    for i in range(2 * CLIENTS_PER_ACCESS):
        hosts.append(Host(f"client{i + 1}", "client", f"s{3 + i // CLIENTS_PER_ACCESS}"))
    for j, leaf in enumerate(leaves):
        for k in range(DECOYS_PER_LEAF):
            hosts.append(Host(f"decoy{j * DECOYS_PER_LEAF + k + 1}", "decoy", leaf))
    for leaf in leaves:
        hosts.append(Host(f"gen_{leaf}", "bg_generator", leaf))
    hosts.append(Host("gen_s6", "bg_generator", "s6"))

    levels = {"bot": -2, "client": -2, "decoy": 2, "bg_generator": None}
    edges += [(h.attach_switch, h.id, levels[h.role]) for h in hosts]

    links = []
    for link_id, (a, b, level) in enumerate(edges):
        params = {"capacity": float(capacity), "delay": float(delay)}
        params.update(overrides.get(link_id, {}))
        links.append(Link(link_id, a, b, level=level, **params))
    return Topology(switches, tuple(hosts), tuple(links), n_subtrees, target_link=0)


def route(topology: Topology, src: str, dst: str) -> list[Link]:
    """Links on the unique tree path from ``src`` to ``dst``, in traversal order."""
    topology.host(src)
    topology.host(dst)
    key = (src, dst)
    cached = topology._cache.get(key)
    if cached is None:
        nodes = nx.shortest_path(topology._graph, src, dst)
        g = topology._graph
        cached = tuple(topology.link(g.edges[u, v]["link_id"]) for u, v in zip(nodes, nodes[1:]))
        topology._cache[key] = cached
    return list(cached)


def links_at_level(topology: Topology, level: int) -> list[Link]:
    """Server-side links ``level`` hops below the target link."""
    return [link for link in topology.links if link.level == level]
