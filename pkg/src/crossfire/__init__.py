"""Crossfire link-flooding simulation with correlation and ML detectors."""

from .attack import AttackPlan, WarmupWindow, measure_warmup, schedule_bots, select_target_links
from .config import ConfigError, ScenarioConfig, load_config, validate_config
from .correlation import AlarmPolicy, CorrelationDetector, alarm, l1_normalize, pearson_r, sliding_mean_corr
from .engine import LinkSampleSeries, Scenario, downstream_jump, run
from .topology import Topology, build_topology, route
from .traffic import FlowSpec, RampProfile, TrafficModel, make_background_suite, rate_at

__version__ = "0.1.0"

__all__ = [
    "AlarmPolicy", "AttackPlan", "ConfigError", "CorrelationDetector", "FlowSpec",
    "LinkSampleSeries", "RampProfile", "Scenario", "ScenarioConfig", "Topology", "TrafficModel",
    "WarmupWindow", "alarm", "build_topology", "downstream_jump", "l1_normalize", "load_config",
    "make_background_suite", "measure_warmup", "pearson_r", "rate_at", "route", "run",
    "schedule_bots", "select_target_links", "sliding_mean_corr", "validate_config",
]
