"""Gini decision trees and a bootstrap random forest."""

from __future__ import annotations

import math

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._common import binary_targets


def gini(pos, n):
    p = pos / n
    return 2.0 * p * (1.0 - p)


def best_split(X, y, features):
    """Lowest weighted Gini split of ``(X, y)`` over the candidate columns.

    Returns ``(feature, threshold, weighted_gini)`` or ``None`` when every
    candidate column is constant. Ties go to the earlier candidate, then
    to the lower threshold.
    """
    n = y.size
    if n < 2:
        return None
    Xs = X[:, features]
    order = np.argsort(Xs, axis=0, kind="mergesort")
    xs = np.take_along_axis(Xs, order, axis=0)
    pos_left = np.cumsum(y[order], axis=0)[:-1]
    n_left = np.arange(1, n, dtype=float)[:, None]
    n_right = n - n_left
    pos_right = y.sum() - pos_left
    weighted = (n_left * gini(pos_left, n_left) + n_right * gini(pos_right, n_right)) / n
    weighted[xs[1:] <= xs[:-1]] = np.inf
    flat = np.argmin(weighted.T)
    j, i = divmod(int(flat), n - 1)
    if not np.isfinite(weighted[i, j]):
        return None
    return int(features[j]), float(0.5 * (xs[i, j] + xs[i + 1, j])), float(weighted[i, j])


def _resolve_max_features(max_features, d):
    if max_features is None:
        return d
    if max_features == "sqrt":
        return int(math.ceil(math.sqrt(d)))
    if isinstance(max_features, float):
        return max(1, int(math.ceil(max_features * d)))
    return max(1, min(int(max_features), d))


class DecisionTree(ClassifierMixin, BaseEstimator):
    """Binary CART tree; leaves hold a class vote.

    Nodes split while impure, above ``min_samples_split`` and shallower
    than ``max_depth``; each split looks at ``max_features`` randomly drawn
    columns.
    """

    def __init__(self, max_depth=None, max_features=None, min_samples_split=2, random_state=None):
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.random_state = random_state

    def fit(self, X, y, sample_indices=None):
        X, y = check_X_y(X, y)
        self.classes_, y01 = binary_targets(y)
        self._grow(X, y01, sample_indices)
        return self

    def _grow(self, X, y01, sample_indices=None):
        rng = np.random.default_rng(self.random_state)
        n, d = X.shape
        self.n_features_in_ = d
        k = _resolve_max_features(self.max_features, d)
        depth_cap = np.inf if self.max_depth is None else self.max_depth
        feature, threshold, left, right, vote, value = [], [], [], [], [], []

        def new_node():
            for arr, v in ((feature, -1), (threshold, np.nan), (left, -1), (right, -1),
                           (vote, 0), (value, 0.0)):
                arr.append(v)
            return len(feature) - 1

        idx0 = np.arange(n) if sample_indices is None else np.asarray(sample_indices)
        stack = [(new_node(), idx0, 0)]
        while stack:
            node, idx, depth = stack.pop()
            ys = y01[idx]
            pos = int(ys.sum())
            value[node] = pos / idx.size
            vote[node] = int(2 * pos > idx.size)
            if pos in (0, idx.size) or depth >= depth_cap or idx.size < self.min_samples_split:
                continue
            cand = rng.choice(d, size=k, replace=False) if k < d else np.arange(d)
            split = best_split(X[idx], ys, cand)
            if split is None:
                continue
            f, thr, _ = split
            go_left = X[idx, f] <= thr
            feature[node], threshold[node] = f, thr
            left[node], right[node] = new_node(), new_node()
            stack.append((right[node], idx[~go_left], depth + 1))
            stack.append((left[node], idx[go_left], depth + 1))

        self.feature_ = np.array(feature, dtype=np.int64)
        self.threshold_ = np.array(threshold, dtype=float)
        self.left_ = np.array(left, dtype=np.int64)
        self.right_ = np.array(right, dtype=np.int64)
        self.vote_ = np.array(vote, dtype=np.int64)
        self.value_ = np.array(value, dtype=float)
        return self

    def apply(self, X):
        """Leaf index reached by every row."""
        check_is_fitted(self, "feature_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature_[node]
            inner = f >= 0
            if not inner.any():
                return node
            go_left = X[rows, np.where(inner, f, 0)] <= self.threshold_[node]
            node = np.where(inner, np.where(go_left, self.left_[node], self.right_[node]), node)

    def votes(self, X):
        return self.vote_[self.apply(X)]

    def predict(self, X):
        return self.classes_[self.votes(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature_.tolist(),
            "threshold": [None if np.isnan(t) else t for t in self.threshold_.tolist()],
            "left": self.left_.tolist(),
            "right": self.right_.tolist(),
            "vote": self.vote_.tolist(),
            "value": self.value_.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict, classes, n_features: int) -> DecisionTree:
        tree = cls()
        tree.classes_ = np.asarray(classes)
        tree.n_features_in_ = n_features
        tree.feature_ = np.asarray(data["feature"], dtype=np.int64)
        tree.threshold_ = np.array([np.nan if t is None else t for t in data["threshold"]], dtype=float)
        tree.left_ = np.asarray(data["left"], dtype=np.int64)
        tree.right_ = np.asarray(data["right"], dtype=np.int64)
        tree.vote_ = np.asarray(data["vote"], dtype=np.int64)
        tree.value_ = np.asarray(data["value"], dtype=float)
        return tree


def _fit_tree(X, y01, params, seed, bootstrap):
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    idx = rng.integers(0, n, n) if bootstrap else None
    tree = DecisionTree(**params, random_state=rng)
    return tree._grow(X, y01, idx)


class RandomForest(ClassifierMixin, BaseEstimator):
    """Majority vote of bootstrap-grown Gini trees.

    Tree ``i`` draws its bootstrap sample and split candidates from the
    ``i``-th child of ``SeedSequence(random_state)``, so the forest is the
    same whether trees grow sequentially or on ``n_jobs`` workers.
    """

    def __init__(self, n_estimators=100, max_depth=12, max_features="sqrt",
                 min_samples_split=2, bootstrap=True, random_state=None, n_jobs=None):
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.max_features = max_features
        self.min_samples_split = min_samples_split
        self.bootstrap = bootstrap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be at least 1")
        self.classes_, y01 = binary_targets(y)
        self.n_features_in_ = X.shape[1]
        seeds = np.random.SeedSequence(self.random_state).spawn(self.n_estimators)
        params = {"max_depth": self.max_depth, "max_features": self.max_features,
                  "min_samples_split": self.min_samples_split}
        self.estimators_ = Parallel(n_jobs=self.n_jobs)(
            delayed(_fit_tree)(X, y01, params, s, self.bootstrap) for s in seeds
        )
        for tree in self.estimators_:
            tree.classes_ = self.classes_
        return self

    def decision_function(self, X):
        """Fraction of trees voting for the positive class."""
        check_is_fitted(self, "estimators_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return np.mean([t.votes(X) for t in self.estimators_], axis=0)

    def predict_proba(self, X):
        p = self.decision_function(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X):
        # ties go to the negative class
        return self.classes_[(self.decision_function(X) > 0.5).astype(int)]

    def to_dict(self) -> dict:
        check_is_fitted(self, "estimators_")
        params = self.get_params()
        params["random_state"] = None if params["random_state"] is None else int(params["random_state"])
        return {
            "kind": "random_forest",
            "params": params,
            "classes": self.classes_.tolist(),
            "n_features": self.n_features_in_,
            "trees": [t.to_dict() for t in self.estimators_],
        }

    @classmethod
    def from_dict(cls, data: dict) -> RandomForest:
        model = cls(**data["params"])
        model.classes_ = np.asarray(data["classes"])
        model.n_features_in_ = data["n_features"]
        model.estimators_ = [
            DecisionTree.from_dict(t, model.classes_, model.n_features_in_) for t in data["trees"]
        ]
        return model
