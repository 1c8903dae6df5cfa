"""Linear SVM trained by mini-batch subgradient descent on the hinge loss."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from ._common import binary_targets


class LinearSVM(ClassifierMixin, BaseEstimator):
    """Minimizes ``lambda/2 ||w||^2 + mean(max(0, 1 - y (w.x + b)))``.

    Step size at update ``t`` is ``1 / (lambda * t)``; after each step ``w``
    is projected onto the ball of radius ``1/sqrt(lambda)``, which contains
    the optimum. The bias is not regularized.
    """

    def __init__(self, regularization=1.0, epochs=200, batch_size=32, random_state=None):
        self.regularization = regularization
        self.epochs = epochs
        self.batch_size = batch_size
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.regularization <= 0:
            raise ValueError("regularization must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        self.classes_, y01 = binary_targets(y)
        ys = 2.0 * y01 - 1.0
        n, d = X.shape
        lam = float(self.regularization)
        rng = np.random.default_rng(self.random_state)
        w = np.zeros(d)
        b = 0.0
        radius = 1.0 / np.sqrt(lam)
        t = 0
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = order[start:start + self.batch_size]
                t += 1
                eta = 1.0 / (lam * t)
                xb, yb = X[idx], ys[idx]
                viol = yb * (xb @ w + b) < 1.0
                gw = lam * w - (yb[viol, None] * xb[viol]).sum(axis=0) / idx.size
                gb = -yb[viol].sum() / idx.size
                w -= eta * gw
                b -= eta * gb
                norm = np.linalg.norm(w)
                if norm > radius:
                    w *= radius / norm
        self.coef_ = w
        self.intercept_ = float(b)
        self.n_features_in_ = d
        self.epochs_ = self.epochs
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        return self.classes_[(self.decision_function(X) > 0).astype(int)]

    def to_dict(self) -> dict:
        check_is_fitted(self, "coef_")
        return {
            "kind": "linear_svm",
            "params": self.get_params(),
            "classes": self.classes_.tolist(),
            "weights": self.coef_.tolist(),
            "bias": self.intercept_,
            "trained_epochs": self.epochs_,
        }

    @classmethod
    def from_dict(cls, data: dict) -> LinearSVM:
        model = cls(**data["params"])
        model.classes_ = np.asarray(data["classes"])
        model.coef_ = np.asarray(data["weights"], dtype=float)
        model.intercept_ = float(data["bias"])
        model.n_features_in_ = model.coef_.size
        model.epochs_ = data["trained_epochs"]
        return model
