import numpy as np
import pytest

from crossfire.config import ScenarioConfig
from crossfire.ml.studies import (
    StudyReport, feature_subsets, run_seeds, run_study, visibility_sets,
)
from crossfire.scenarios import monitored_links, topology_from, with_overrides
from crossfire.topology import links_at_level


def test_run_seeds_disjoint():
    tr, te = run_seeds(3, 2, 2)
    assert not set(tr) & set(te)
    all_ids = [i for s in range(10) for part in run_seeds(s, 2, 2) for i in part]
    assert len(all_ids) == len(set(all_ids))


def test_feature_subsets_nested():
    edges = list(range(100, 140))
    subs = feature_subsets(edges, [5, 10, 20, 30, 40], seed=4)
    for a, b in zip([5, 10, 20, 30], [10, 20, 30, 40]):
        assert set(subs[a]) < set(subs[b])
    assert subs[40] == edges
    assert feature_subsets(edges, [5], 4) == {5: subs[5]}
    with pytest.raises(ValueError):
        feature_subsets(edges, [41], 0)


def test_visibility_sets():
    cfg = ScenarioConfig()
    topo = topology_from(cfg, 8)
    edges = monitored_links(cfg, topo)
    sets = visibility_sets(topo, edges, 20, seed=1)
    assert sorted(sets) == [20, 21, 80, 81]
    up = sets[21][-1]
    assert up in [lk.id for lk in links_at_level(topo, 1)]
    assert sets[21][:20] == sets[20] and sets[81] == edges + [up]


def test_report_csv():
    r = StudyReport("distribution", [("svm_2ST", 0, 0.9), ("svm_2ST", 1, 0.8), ("rf_2ST", 0, 1.0)])
    lines = r.to_csv().splitlines()
    assert lines[0] == "config,seed,auc"
    assert lines[3] == "svm_2ST,mean,0.850000"
    assert r.summary()["svm_2ST"]["std"] == pytest.approx(0.05)


def test_small_study_runs():
    cfg = with_overrides(ScenarioConfig(), detect={"topologies": [2], "forest_trees": 5,
                                                   "svm_epochs": 5, "train_runs": 1,
                                                   "test_runs": 1})
    r = run_study("distribution", cfg, [0, 1])
    assert r.configs() == ["svm_2ST", "rf_2ST"]
    assert all(0 <= a <= 1 for *_, a in r.rows)
    again = run_study("distribution", cfg, [0, 1])
    assert again.to_csv() == r.to_csv()
    with pytest.raises(ValueError):
        run_study("nope", cfg, [0])
