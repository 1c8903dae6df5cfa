import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossfire.ml.forest import DecisionTree, RandomForest, best_split

from .oracles import exhaustive_best_split


def test_root_split_matches_exhaustive_search():
    rng = np.random.default_rng(0)
    X = rng.integers(0, 6, (40, 3)).astype(float)
    y = ((X[:, 1] > 2) ^ (rng.random(40) < 0.1)).astype(int)
    j, thr, score = best_split(X, y, np.arange(3))
    ref = exhaustive_best_split(X.tolist(), y.tolist())
    assert (j, thr) == ref[:2]
    assert score == pytest.approx(ref[2], abs=1e-12)
    tree = DecisionTree(max_depth=1, max_features=None).fit(X, y)
    assert (tree.feature_[0], tree.threshold_[0]) == ref[:2]


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.booleans()),
                min_size=4, max_size=30).filter(lambda v: 0 < sum(c for *_, c in v) < len(v)))
def test_split_score_matches_oracle(rows):
    X = np.array([[a, b] for a, b, _ in rows], dtype=float)
    y = np.array([c for *_, c in rows], dtype=int)
    got = best_split(X, y, np.arange(2))
    ref = exhaustive_best_split(X.tolist(), y.tolist())
    if ref is None:
        assert got is None
    else:
        assert got[2] == pytest.approx(ref[2], abs=1e-12)


def test_single_tree_forest_is_plain_tree():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(80, 4))
    y = (X[:, 0] + X[:, 2] > 0).astype(int)
    f = RandomForest(n_estimators=1, max_depth=None, max_features=None, bootstrap=False,
                     random_state=0).fit(X, y)
    t = DecisionTree(max_depth=None, max_features=None).fit(X, y)
    assert np.array_equal(f.predict(X), t.predict(X))
    assert set(np.unique(f.decision_function(X))) <= {0.0, 1.0}


def test_threshold_data_perfect():
    rng = np.random.default_rng(2)
    X = rng.uniform(0, 10, (200, 3))
    y = (X[:, 1] > 4).astype(int)
    f = RandomForest(n_estimators=15, random_state=0).fit(X[:100], y[:100])
    assert (f.predict(X[100:]) == y[100:]).mean() >= 0.97
    tree = DecisionTree(max_features=None).fit(X[:100], y[:100])
    Xt = X[100:][np.abs(X[100:, 1] - 4) > 0.5]
    assert (tree.predict(Xt) == (Xt[:, 1] > 4)).all()


def test_parallel_equals_sequential_and_order_invariant():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(150, 5))
    y = (X[:, 0] - X[:, 3] > 0.2).astype(int)
    a = RandomForest(n_estimators=12, random_state=7, n_jobs=1).fit(X, y)
    b = RandomForest(n_estimators=12, random_state=7, n_jobs=2).fit(X, y)
    assert a.to_dict()["trees"] == b.to_dict()["trees"]
    s = a.decision_function(X)
    a.estimators_ = a.estimators_[::-1]
    assert np.array_equal(a.decision_function(X), s)
    perm = rng.permutation(len(X))
    assert np.array_equal(a.decision_function(X[perm]), s[perm])


def test_all_trees_attack_scores_one():
    X = np.r_[np.zeros((10, 2)), np.ones((10, 2))]
    y = np.r_[np.zeros(10), np.ones(10)]
    f = RandomForest(n_estimators=5, random_state=0, bootstrap=False).fit(X, y)
    assert (f.decision_function(np.ones((3, 2))) == 1.0).all()
    assert (f.predict_proba(np.ones((1, 2)))[:, 1] == 1.0).all()


def test_errors_and_serialization():
    X = np.random.default_rng(0).normal(size=(30, 2))
    with pytest.raises(ValueError):
        RandomForest().fit(X, np.zeros(30))
    with pytest.raises(ValueError):
        RandomForest(n_estimators=0).fit(X, np.r_[np.zeros(15), np.ones(15)])
    f = RandomForest(n_estimators=4, random_state=1).fit(X, np.r_[np.zeros(15), np.ones(15)])
    back = RandomForest.from_dict(json.loads(json.dumps(f.to_dict())))
    assert np.array_equal(back.decision_function(X), f.decision_function(X))
    with pytest.raises(ValueError):
        f.decision_function(np.ones((2, 3)))
