"""Named experiments: scenario sets, per-seed outputs, figure CSVs and summary.json."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

import jsonschema
import numpy as np

from .config import ScenarioConfig, load_config, validate_config
from .correlation import AlarmPolicy, CorrelationTrace, alarm, sliding_mean_corr
from .engine import LinkSampleSeries, downstream_jump
from .ml.studies import run_study
from .scenarios import build_scenario, monitored_links, simulate, topology_from

# Correlation experiments thin the background so a few hundred bps per decoy
# stands out, and stagger bots over one window so the first window holds a
# single attack sample.
CORR_TRAFFIC = {"host_scale": 0.001, "generator_scale": 0.001, "injection_scale": 0.0}
CORR_ATTACK = {
    "rate_mode": "per_decoy",
    "assignment": "all",
    "bs": 150.0,
    "ramp": "linear",
    "ramp_duration": 150.0,
}


def _corr_preset(per_decoy):
    return {
        "topology": {"n_subtrees": 8},
        "traffic": dict(CORR_TRAFFIC),
        "attack": {**CORR_ATTACK, "per_decoy_bps": list(per_decoy)},
    }


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    preset: dict
    runner: Callable


EXPERIMENTS: dict[str, Experiment] = {}


def _register(name, description, preset=None):
    def deco(fn):
        EXPERIMENTS[name] = Experiment(name, description, preset or {}, fn)
        return fn
    return deco


def experiment_config(name: str, path=None, text: str | None = None) -> ScenarioConfig:
    """Config for ``name``: defaults < experiment preset < file contents."""
    exp = get_experiment(name)
    if path is not None:
        return load_config(path, exp.preset)
    return validate_config(text or "", exp.preset)


def get_experiment(name: str) -> Experiment:
    try:
        return EXPERIMENTS[name]
    except KeyError:
        raise KeyError(f"unknown experiment {name!r}; choose from {sorted(EXPERIMENTS)}") from None


# ---------------------------------------------------------------- output helpers

class _Writer:
    def __init__(self, out: Path):
        self.out = Path(out)
        self.files: list[str] = []

    def text(self, rel: str, content: str) -> None:
        path = self.out / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8", newline="")
        self.files.append(rel)

    def json(self, rel: str, data) -> None:
        self.text(rel, dumps(data))

    def table(self, rel: str, header, rows) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        self.text(rel, buf.getvalue())


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if math.isnan(v) or math.isinf(v) else v
    return obj


def dumps(data) -> str:
    return json.dumps(_clean(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def summary_schema() -> dict:
    text = resources.files("crossfire").joinpath("schemas/summary.schema.json").read_text("utf-8")
    return json.loads(text)


def _fmt(v: float) -> str:
    return f"{v:g}"


def _per_seed(values) -> dict:
    vals = [None if v is None else float(v) for v in values]
    real = [v for v in vals if v is not None]
    return {"per_seed": vals, "mean": float(np.mean(real)) if real else None}


def schedule_record(cfg: ScenarioConfig, seed: int, series: LinkSampleSeries, **kw) -> dict:
    scenario = build_scenario(cfg, seed, **kw)
    plan = scenario.attack_plan
    record = {"seed": seed, "target_link": scenario.target_link,
              "warmup": None if series.warmup is None else
              {"t_first_bot": series.warmup[0], "t_link_down": series.warmup[1]}}
    if plan is None:
        record["attack"] = None
        return record
    groups: dict[tuple[str, float], dict] = {}
    for f in scenario.flows:
        if not f.attack:
            continue
        g = groups.setdefault((f.src, f.start_offset), {
            "bot": f.src, "start": f.start_offset, "end": f.end, "decoys": [],
            "rate_start": 0.0, "rate_end": 0.0})
        g["decoys"].append(f.dst)
        g["rate_start"] += f.ramp.r_start if f.ramp.shape == "linear" else f.ramp.r_end
        g["rate_end"] += f.ramp.r_end
    record["attack"] = {
        "bs": plan.bs, "dur": plan.dur, "attack_start": plan.attack_start,
        "rolling_period": plan.rolling_period, "target_links": list(plan.target_links),
        "bot_flows": sorted(groups.values(), key=lambda g: (g["start"], g["bot"])),
    }
    return record


def _emit_run(w: _Writer, rel: str, cfg, seed, series, **kw) -> None:
    w.text(f"{rel}/links.csv", series.to_csv())
    w.json(f"{rel}/schedule.json", schedule_record(cfg, seed, series, **kw))


def _warmup_length(series: LinkSampleSeries):
    if series.warmup is None or series.warmup[1] is None:
        return None
    return series.warmup[1] - series.warmup[0]


def _mean_target_trace(runs, target):
    return np.mean([s.utilization_of(target) for s in runs], axis=0)


# ---------------------------------------------------------------- experiments

@_register("sync", "target-link utilization for each BS in attack.bs_values")
def _sync(cfg: ScenarioConfig, seeds, w: _Writer) -> dict:
    warm, traces = {}, {}
    for bs in cfg.attack.bs_values:
        runs = []
        for s in seeds:
            series = simulate(cfg, s, bs=bs)
            _emit_run(w, f"seed_{s}/bs_{_fmt(bs)}", cfg, s, series, bs=bs)
            runs.append(series)
        warm[_fmt(bs)] = _per_seed(_warmup_length(r) for r in runs)
        traces[bs] = (runs[0].times, _mean_target_trace(runs, runs[0].target_link))
    w.table("fig_sync.csv", ("t", "bs", "utilization"),
            [(_fmt(t), _fmt(bs), f"{u:.6f}") for bs, (ts, us) in traces.items() for t, u in zip(ts, us)])
    return {"warmup": warm}


def sync_dur_values(cfg: ScenarioConfig, reference: float) -> list[float]:
    """Explicit ``attack.dur_values``, else half and 1.5x the reference warm-up."""
    if cfg.attack.dur_values:
        return [float(v) for v in cfg.attack.dur_values]
    p = cfg.monitor.poll_interval
    return [max(p, p * math.floor(0.5 * reference / p)), p * math.ceil(1.5 * reference / p)]


@_register("sync_dur", "saturation with Dur below and above the warm-up measured at attack.bs",
           {"attack": {"bs": 300.0}})
def _sync_dur(cfg: ScenarioConfig, seeds, w: _Writer) -> dict:
    bs = cfg.attack.bs
    ref_runs = [simulate(cfg, s, bs=bs) for s in seeds]
    lengths = [_warmup_length(r) for r in ref_runs]
    real = [x for x in lengths if x is not None]
    if not real:
        raise RuntimeError(f"target never saturates at bs={bs}; no reference warm-up")
    reference = float(np.mean(real))
    durs = sync_dur_values(cfg, reference)
    saturated, traces = {}, {}
    for dur in durs:
        runs = []
        for s in seeds:
            series = simulate(cfg, s, bs=bs, dur=dur)
            _emit_run(w, f"seed_{s}/dur_{_fmt(dur)}", cfg, s, series, bs=bs, dur=dur)
            runs.append(series)
        saturated[_fmt(dur)] = [r.warmup is not None and r.warmup[1] is not None for r in runs]
        traces[dur] = (runs[0].times, _mean_target_trace(runs, runs[0].target_link))
    w.table("fig_sync_dur.csv", ("t", "dur", "utilization"),
            [(_fmt(t), _fmt(d), f"{u:.6f}") for d, (ts, us) in traces.items() for t, u in zip(ts, us)])
    return {"warmup": {_fmt(bs): _per_seed(lengths)}, "reference_warmup": reference,
            "dur_values": durs, "saturated": saturated}


@_register("distribution", "decoy-edge utilization jump per topology in detect.topologies")
def _distribution(cfg: ScenarioConfig, seeds, w: _Writer) -> dict:
    a = cfg.attack
    window = (a.attack_start, a.attack_start + a.dur)
    jumps, rows = {}, []
    for n in cfg.detect.topologies:
        edges = monitored_links(cfg, topology_from(cfg, n))
        per_seed, curves = [], []
        for s in seeds:
            series = simulate(cfg, s, n_subtrees=n)
            _emit_run(w, f"seed_{s}/{n}ST", cfg, s, series, n_subtrees=n)
            per_seed.append(np.mean([downstream_jump(series, e, window) for e in edges]))
            curves.append(series.utilization[[series.row(e) for e in edges]].mean(axis=0))
        jumps[f"{n}ST"] = _per_seed(per_seed)
        rows += [(_fmt(t), n, f"{u:.6f}") for t, u in zip(series.times, np.mean(curves, axis=0))]
    w.table("fig_distribution.csv", ("t", "n_subtrees", "edge_utilization"), rows)
    return {"jumps": jumps}


def correlation_trace(cfg: ScenarioConfig, series: LinkSampleSeries) -> CorrelationTrace:
    links = monitored_links(cfg, topology_from(cfg))
    return sliding_mean_corr(series.bits(links), cfg.detect.window, series.times,
                             keep_pairs=cfg.detect.per_pair_dump)


def warmup_windows(trace: CorrelationTrace, series: LinkSampleSeries) -> np.ndarray:
    """Trace indices of the warm-up windows.

    The first ends at the first attack sample (so it spans ``window - 1``
    clean samples and one attack sample); the run stops after ``window``
    windows or at link-down, whichever is first.
    """
    if series.warmup is None:
        raise ValueError("run carries no attack load on the target link")
    t_first, t_down = series.warmup
    idx = np.flatnonzero(np.isclose(trace.times, t_first))
    if idx.size == 0:
        raise ValueError(f"first attack sample at t={t_first} precedes the first full window")
    sel = np.arange(idx[0], min(idx[0] + trace.window, trace.times.size))
    if t_down is not None:
        sel = sel[trace.times[sel] < t_down] if trace.times[sel[0]] < t_down else sel[:1]
    return sel


def _corr_experiment(cfg: ScenarioConfig, seeds, w: _Writer) -> dict:
    policy = AlarmPolicy(cfg.detect.alarm_threshold, cfg.detect.alarm_consecutive)
    first, final, alarms, inside, aligned = [], [], [], [], []
    for s in seeds:
        series = simulate(cfg, s)
        _emit_run(w, f"seed_{s}", cfg, s, series)
        trace = correlation_trace(cfg, series)
        w.text(f"seed_{s}/corr.csv", trace.to_csv())
        if trace.pair_r is not None:
            links = monitored_links(cfg, topology_from(cfg))
            w.text(f"seed_{s}/corr_pairs.csv", trace.pairs_csv(links))
        sel = warmup_windows(trace, series)
        first.append(trace.mean_r[sel[0]])
        final.append(trace.mean_r[sel[-1]])
        aligned.append(trace.mean_r[sel])
        t_alarm = alarm(trace, policy)
        alarms.append(t_alarm)
        inside.append(t_alarm is not None and t_alarm <= trace.times[sel[-1]])
    n = min(len(x) for x in aligned)
    mean_trace = np.mean([x[:n] for x in aligned], axis=0)
    p = cfg.monitor.poll_interval
    w.table("fig_corr.csv", ("k", "t_rel", "mean_r"),
            [(k, _fmt(k * p), f"{r:.6f}") for k, r in enumerate(mean_trace)])
    return {"mean_r": {"first": _per_seed(first), "final": _per_seed(final),
                       "warmup_trace": list(mean_trace)},
            "alarm": alarms, "alarm_in_warmup": inside}


_register("corr_exp1", "mean pairwise correlation through a 300->600 bps per-decoy warm-up",
          _corr_preset([300.0, 600.0]))(_corr_experiment)
_register("corr_exp2", "mean pairwise correlation through a 60->150 bps per-decoy warm-up",
          _corr_preset([60.0, 150.0]))(_corr_experiment)


@_register("no_attack", "mean pairwise correlation on background traffic only",
           {"topology": {"n_subtrees": 8}, "traffic": dict(CORR_TRAFFIC),
            "attack": {"enabled": False}})
def _no_attack(cfg: ScenarioConfig, seeds, w: _Writer) -> dict:
    policy = AlarmPolicy(cfg.detect.alarm_threshold, cfg.detect.alarm_consecutive)
    max_abs, alarms, traces = [], [], []
    for s in seeds:
        series = simulate(cfg, s)
        _emit_run(w, f"seed_{s}", cfg, s, series)
        trace = correlation_trace(cfg, series)
        w.text(f"seed_{s}/corr.csv", trace.to_csv())
        max_abs.append(np.nanmax(np.abs(trace.mean_r)))
        alarms.append(alarm(trace, policy))
        traces.append(trace)
    w.table("fig_no_attack.csv", ("t", "mean_r"),
            [(_fmt(t), f"{r:.6f}") for t, r in
             zip(traces[0].times, np.mean([tr.mean_r for tr in traces], axis=0))])
    return {"mean_r": {"max_abs": _per_seed(max_abs)}, "alarm": alarms}


def _study(kind):
    def runner(cfg: ScenarioConfig, seeds, w: _Writer) -> dict:
        report = run_study(kind, cfg, seeds)
        w.text(f"study_{kind}.csv", report.to_csv())
        return {"auc": report.summary()}
    return runner


_register("ml_distribution", "SVM/RF AUC per topology")(_study("distribution"))
_register("ml_features", "SVM/RF AUC against the number of decoy-edge features")(_study("feature_count"))
_register("ml_visibility", "SVM/RF AUC with and without one upper-level link")(_study("visibility"))


def run_experiment(name: str, config: ScenarioConfig | None = None, seeds=None, out=None) -> dict:
    """Run ``name`` and write its files under ``out``; returns the summary.

    ``config`` should already include the experiment preset (see
    ``experiment_config``); ``None`` means the preset over defaults.
    """
    exp = get_experiment(name)
    cfg = config if config is not None else experiment_config(name)
    seeds = [int(s) for s in (cfg.seeds if seeds is None else seeds)]
    if not seeds:
        raise ValueError("no seeds given")
    out = Path(cfg.output_dir if out is None else out)
    out.mkdir(parents=True, exist_ok=True)
    w = _Writer(out)
    results = exp.runner(cfg, seeds, w)
    summary = _clean({
        "experiment": name,
        "seeds": seeds,
        "config": cfg.to_dict(),
        "results": results,
        "files": sorted(w.files),
    })
    jsonschema.validate(summary, summary_schema())
    w.text("summary.json", dumps(summary))
    return summary


__all__ = ["EXPERIMENTS", "Experiment", "experiment_config", "get_experiment", "run_experiment",
           "summary_schema"]
