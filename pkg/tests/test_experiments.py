import csv
import json

import jsonschema
import pytest

from crossfire.experiments import EXPERIMENTS, experiment_config, run_experiment, summary_schema
from crossfire.scenarios import _RUN_CACHE

SHORT = "sim:\n  duration: 900\n"


def _files(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in root.rglob("*") if p.is_file()}


@pytest.mark.parametrize("name", ["sync", "distribution", "corr_exp1", "no_attack"])
def test_outputs_and_schema(tmp_path, name):
    cfg = experiment_config(name, text=SHORT)
    summary = run_experiment(name, cfg, [0, 1], tmp_path)
    jsonschema.validate(summary, summary_schema())
    on_disk = json.loads((tmp_path / "summary.json").read_text())
    assert on_disk == summary
    for rel in summary["files"]:
        assert (tmp_path / rel).is_file()
        if rel.endswith(".csv"):
            with open(tmp_path / rel) as fh:
                header = next(csv.reader(fh))
            assert all(h and not h[0].isdigit() for h in header[:1])
    assert any(f.endswith("links.csv") for f in summary["files"])
    assert any(f.endswith("schedule.json") for f in summary["files"])


def test_corr_files(tmp_path):
    cfg = experiment_config("corr_exp2", text=SHORT + "detect:\n  per_pair_dump: true\n"
                            "topology:\n  n_subtrees: 2\n")
    summary = run_experiment("corr_exp2", cfg, [3], tmp_path)
    head = (tmp_path / "seed_3" / "corr.csv").read_text().splitlines()[0]
    assert head == "t,mean_r,n_valid_pairs"
    pairs_head = (tmp_path / "seed_3" / "corr_pairs.csv").read_text().splitlines()[0]
    assert len(pairs_head.split(",")) == 1 + 190
    assert len(summary["results"]["mean_r"]["first"]["per_seed"]) == 1


def test_schedule_record(tmp_path):
    cfg = experiment_config("sync", text=SHORT + "attack:\n  bs_values: [120]\n")
    run_experiment("sync", cfg, [4], tmp_path)
    sched = json.loads((tmp_path / "seed_4" / "bs_120" / "schedule.json").read_text())
    starts = [g["start"] for g in sched["attack"]["bot_flows"]]
    assert len(starts) == 10 and all(300 <= s <= 420 for s in starts)
    assert sched["warmup"]["t_first_bot"] >= 300


def test_ml_experiment_small(tmp_path):
    cfg = experiment_config("ml_visibility", text="detect:\n  forest_trees: 5\n  svm_epochs: 5\n"
                            "  train_runs: 1\n  test_runs: 1\n  visibility_subtrees: 2\n"
                            "  visibility_edges: 5\n")
    summary = run_experiment("ml_visibility", cfg, [0], tmp_path)
    assert set(summary["results"]["auc"]) == {f"{m}_{d}d" for m in ("svm", "rf")
                                              for d in (5, 6, 20, 21)}
    assert (tmp_path / "study_visibility.csv").read_text().startswith("config,seed,auc\n")


def test_rerun_is_byte_identical(tmp_path):
    cfg = experiment_config("sync_dur", text=SHORT)
    run_experiment("sync_dur", cfg, [0, 1], tmp_path / "a")
    _RUN_CACHE.clear()  # recompute rather than reuse memoized runs
    run_experiment("sync_dur", cfg, [0, 1], tmp_path / "b")
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_unknown_experiment():
    with pytest.raises(KeyError):
        run_experiment("nope")
    assert len(EXPERIMENTS) == 9
