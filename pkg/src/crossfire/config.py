"""Scenario configuration: YAML sections mirroring the modules.

Every field has a default, so an empty file is a valid configuration.
``validate_config`` reports all problems at once, each tagged with its
dotted path and source line.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import dataclass, field
from typing import Any

import yaml

from .traffic import APP_MEAN_BPS, HOST_KINDS, MODELS


@dataclass
class TopologySection:
    n_subtrees: int = 4
    capacity: float = 2e6
    delay: float = 10.0
    link_overrides: dict = field(default_factory=dict)


@dataclass
class TrafficSection:
    enabled: list = field(default_factory=lambda: list(HOST_KINDS))
    app_mean_bps: dict = field(default_factory=lambda: dict(APP_MEAN_BPS))
    host_scale: float = 0.07
    generators: bool = True
    generator_model: str = "background1"
    generator_scale: float = 3.0
    injection_scale: float = 0.0


@dataclass
class AttackSection:
    enabled: bool = True
    bs: float = 0.0
    dur: float = 300.0
    attack_start: float = 300.0
    # budget: bots fill the target link's spare capacity x overprovision;
    # per_decoy: every decoy receives per_decoy_bps[0] -> [1] once all bots run
    rate_mode: str = "budget"
    overprovision: float = 1.3
    per_decoy_bps: list = field(default_factory=lambda: [300.0, 600.0])
    ramp: str = "none"
    ramp_duration: float = 60.0
    ramp_from: float = 0.0
    assignment: str = "even"
    rolling_period: Any = None
    # link-id sets the rolling scheme cycles through; empty picks the
    # subtree uplinks split into two halves
    target_sets: list = field(default_factory=list)
    bs_values: list = field(default_factory=lambda: [0.0, 60.0, 120.0, 300.0])
    dur_values: list = field(default_factory=list)


@dataclass
class MonitorSection:
    links: Any = "decoy_edges"
    poll_interval: float = 5.0
    tick: float = 1.0


@dataclass
class DetectSection:
    window: int = 30
    alarm_threshold: float = 0.5
    alarm_consecutive: int = 3
    per_pair_dump: bool = False
    svm_regularization: float = 1.0
    svm_epochs: int = 200
    forest_trees: int = 100
    forest_depth: int = 12
    forest_features: Any = "sqrt"
    warmup_positive: bool = True
    train_runs: int = 2
    test_runs: int = 2
    topologies: list = field(default_factory=lambda: [2, 4, 8])
    feature_sizes: list = field(default_factory=lambda: [5, 10, 20, 30, 40])
    visibility_edges: int = 20
    visibility_subtrees: int = 8
    models: list = field(default_factory=lambda: ["svm", "rf"])


@dataclass
class SimSection:
    duration: float = 1800.0
    saturation_threshold: float = 0.999


@dataclass
class ScenarioConfig:
    topology: TopologySection = field(default_factory=TopologySection)
    traffic: TrafficSection = field(default_factory=TrafficSection)
    attack: AttackSection = field(default_factory=AttackSection)
    monitor: MonitorSection = field(default_factory=MonitorSection)
    detect: DetectSection = field(default_factory=DetectSection)
    sim: SimSection = field(default_factory=SimSection)
    seeds: list = field(default_factory=lambda: [0])
    output_dir: str = "out"
    preset: str = "d5"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


SECTIONS = {
    "topology": TopologySection,
    "traffic": TrafficSection,
    "attack": AttackSection,
    "monitor": MonitorSection,
    "detect": DetectSection,
    "sim": SimSection,
}

# Named presets layered under the user's file. d30 is the long-attack
# variant: bots start after 30 minutes and run for another 30.
PRESETS = {
    "d5": {},
    "d30": {"attack": {"attack_start": 1800.0, "dur": 1800.0}, "sim": {"duration": 5400.0}},
}


@dataclass(frozen=True)
class ConfigIssue:
    path: str
    line: int | None
    message: str

    def __str__(self):
        where = f" (line {self.line})" if self.line else ""
        return f"{self.path}{where}: {self.message}"


class ConfigError(ValueError):
    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


def _construct(node, path, lines):
    """YAML node -> plain data, recording the source line of every path."""
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = yaml.safe_load(yaml.serialize(k))
            out[key] = _construct(v, f"{path}.{key}" if path else str(key), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_construct(v, f"{path}[{i}]", lines) for i, v in enumerate(node.value)]
    return yaml.safe_load(yaml.serialize(node))


def parse_yaml(text: str) -> tuple[dict, dict[str, int]]:
    lines: dict[str, int] = {}
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError([ConfigIssue("<file>", mark.line + 1 if mark else None, str(exc))]) from None
    if node is None:
        return {}, lines
    data = _construct(node, "", lines)
    if not isinstance(data, dict):
        raise ConfigError([ConfigIssue("<file>", 1, "top level must be a mapping")])
    return data, lines


def deep_merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_types(cls, data: dict, prefix: str, issues: list, lines: dict):
    defaults = cls()
    known = {f.name for f in dataclasses.fields(cls)}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in known:
            issues.append(ConfigIssue(path, lines.get(path), "unknown field"))
            continue
        default = getattr(defaults, key)
        if isinstance(default, bool):
            ok = isinstance(value, bool)
        elif isinstance(default, int):
            ok = isinstance(value, int) and not isinstance(value, bool)
        elif isinstance(default, float):
            ok = _is_number(value)
        elif isinstance(default, str):
            ok = isinstance(value, str)
        elif isinstance(default, list):
            ok = isinstance(value, list)
        elif isinstance(default, dict):
            ok = isinstance(value, dict)
        else:
            ok = True
        if not ok:
            issues.append(ConfigIssue(path, lines.get(path),
                                      f"expected {type(default).__name__}, got {type(value).__name__}"))


def _constraints(cfg: ScenarioConfig):
    """Yield ``(path, message)`` for every semantic violation."""
    t, tr, a, m, d, s = cfg.topology, cfg.traffic, cfg.attack, cfg.monitor, cfg.detect, cfg.sim
    if t.n_subtrees < 1:
        yield "topology.n_subtrees", "must be >= 1"
    if t.capacity <= 0:
        yield "topology.capacity", "must be > 0"
    if t.delay < 0:
        yield "topology.delay", "must be >= 0"
    for k in tr.enabled:
        if k not in HOST_KINDS:
            yield "traffic.enabled", f"unknown model {k!r}"
    if tr.generator_model not in MODELS:
        yield "traffic.generator_model", f"unknown model {tr.generator_model!r}"
    for name in ("host_scale", "generator_scale", "injection_scale"):
        if getattr(tr, name) < 0:
            yield f"traffic.{name}", "must be >= 0"
    if a.bs < 0:
        yield "attack.bs", "must be >= 0"
    if a.dur <= 0:
        yield "attack.dur", "must be > 0"
    if a.attack_start < 0:
        yield "attack.attack_start", "must be >= 0"
    if a.rate_mode not in ("budget", "per_decoy"):
        yield "attack.rate_mode", "must be 'budget' or 'per_decoy'"
    if a.overprovision <= 0:
        yield "attack.overprovision", "must be > 0"
    if len(a.per_decoy_bps) != 2 or not all(_is_number(v) for v in a.per_decoy_bps) \
            or not 0 <= a.per_decoy_bps[0] <= a.per_decoy_bps[1]:
        yield "attack.per_decoy_bps", "must be [start, end] with 0 <= start <= end"
    if a.ramp not in ("none", "linear"):
        yield "attack.ramp", "must be 'none' or 'linear'"
    if a.ramp == "linear" and a.ramp_duration <= 0:
        yield "attack.ramp_duration", "must be > 0 for a linear ramp"
    if not 0 <= a.ramp_from <= 1:
        yield "attack.ramp_from", "must be in [0, 1]"
    if a.assignment not in ("even", "all"):
        yield "attack.assignment", "must be 'even' or 'all'"
    if a.rolling_period is not None and not (_is_number(a.rolling_period) and a.rolling_period > 0):
        yield "attack.rolling_period", "must be null or > 0"
    if any(not _is_number(v) or v < 0 for v in a.bs_values):
        yield "attack.bs_values", "entries must be >= 0"
    if any(not _is_number(v) or v <= 0 for v in a.dur_values):
        yield "attack.dur_values", "entries must be > 0"
    if not (m.links == "decoy_edges" or isinstance(m.links, list)):
        yield "monitor.links", "must be 'decoy_edges' or a list of link ids"
    if m.tick <= 0:
        yield "monitor.tick", "must be > 0"
    if m.poll_interval <= 0:
        yield "monitor.poll_interval", "must be > 0"
    elif m.tick > 0:
        ratio = m.poll_interval / m.tick
        if abs(ratio - round(ratio)) > 1e-9:
            yield "monitor.tick", f"must divide poll_interval ({m.poll_interval})"
    if s.duration < m.poll_interval:
        yield "sim.duration", "must be >= monitor.poll_interval"
    if not 0 < s.saturation_threshold <= 1:
        yield "sim.saturation_threshold", "must be in (0, 1]"
    if d.window < 2:
        yield "detect.window", "must be >= 2"
    if not -1 < d.alarm_threshold <= 1:
        yield "detect.alarm_threshold", "must be in (-1, 1]"
    if d.alarm_consecutive < 1:
        yield "detect.alarm_consecutive", "must be >= 1"
    if d.svm_regularization <= 0:
        yield "detect.svm_regularization", "must be > 0"
    if d.svm_epochs < 1:
        yield "detect.svm_epochs", "must be >= 1"
    if d.forest_trees < 1:
        yield "detect.forest_trees", "must be >= 1"
    if d.forest_depth < 1:
        yield "detect.forest_depth", "must be >= 1"
    f = d.forest_features
    if not (f is None or f == "sqrt" or (isinstance(f, int) and not isinstance(f, bool) and f >= 1)):
        yield "detect.forest_features", "must be 'sqrt', null or a positive integer"
    if d.visibility_edges < 1:
        yield "detect.visibility_edges", "must be >= 1"
    if d.visibility_subtrees < 1:
        yield "detect.visibility_subtrees", "must be >= 1"
    if any(not isinstance(x, list) or not x or any(not isinstance(i, int) for i in x)
           for x in a.target_sets):
        yield "attack.target_sets", "entries must be non-empty lists of link ids"
    if d.train_runs < 1 or d.test_runs < 1:
        yield "detect.train_runs", "train_runs and test_runs must be >= 1"
    if d.train_runs > 500 or d.test_runs > 500:
        yield "detect.train_runs", "train_runs and test_runs must be <= 500"
    for mdl in d.models:
        if mdl not in ("svm", "rf"):
            yield "detect.models", f"unknown model {mdl!r}"
    if any(not isinstance(n, int) or n < 1 for n in d.topologies):
        yield "detect.topologies", "entries must be positive integers"
    if any(not isinstance(n, int) or n < 1 for n in d.feature_sizes):
        yield "detect.feature_sizes", "entries must be positive integers"
    if not cfg.seeds or any(not isinstance(x, int) or isinstance(x, bool) for x in cfg.seeds):
        yield "seeds", "must be a non-empty list of integers"
    if cfg.preset not in PRESETS:
        yield "preset", f"unknown preset {cfg.preset!r}; choose from {sorted(PRESETS)}"


def from_dict(data: dict, lines: dict | None = None) -> ScenarioConfig:
    """Build and validate a config from plain data; raises ``ConfigError``."""
    lines = lines or {}
    issues: list[ConfigIssue] = []
    _check_types(ScenarioConfig, {k: v for k, v in data.items() if k not in SECTIONS},
                 "", issues, lines)
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key in SECTIONS:
            if not isinstance(value, dict):
                if value is not None:
                    issues.append(ConfigIssue(key, lines.get(key), "section must be a mapping"))
                continue
            before = len(issues)
            _check_types(SECTIONS[key], value, key, issues, lines)
            if len(issues) == before:
                kwargs[key] = SECTIONS[key](**value)
        elif not any(i.path == key for i in issues):
            kwargs[key] = value
    if issues:
        raise ConfigError(issues)
    cfg = ScenarioConfig(**kwargs)
    issues = [ConfigIssue(p, lines.get(p), msg) for p, msg in _constraints(cfg)]
    if issues:
        raise ConfigError(issues)
    return cfg


def validate_config(text: str, overrides: dict | None = None) -> ScenarioConfig:
    """Parse YAML text into a fully defaulted config.

    The file's ``preset`` (and then ``overrides``, e.g. an experiment's own
    settings) sit underneath whatever the file states explicitly.
    """
    data, lines = parse_yaml(text)
    preset = data.get("preset", "d5")
    base = deep_merge(PRESETS.get(preset, {}) if isinstance(preset, str) else {}, overrides or {})
    return from_dict(deep_merge(base, data), lines)


def load_config(path, overrides: dict | None = None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return validate_config(fh.read(), overrides)
