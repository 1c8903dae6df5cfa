"""Sliding-window Pearson correlation across monitored links."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

CORR_HEADER = ("t", "mean_r", "n_valid_pairs")


def pearson_r(x, y) -> float:
    """Sample Pearson correlation; ``nan`` when either input is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("pearson_r expects 1-D series")
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least two samples")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(dx @ dy / math.sqrt(float(dx @ dx) * float(dy @ dy)))
    return min(1.0, max(-1.0, r))


def l1_normalize(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.size == 0:
        raise ValueError("empty series")
    total = np.abs(x).sum()
    if total == 0:
        raise ValueError("cannot l1-normalize an all-zero series")
    return x / total


def pair_count(n_links: int) -> int:
    return n_links * (n_links - 1) // 2


@dataclass
class CorrelationTrace:
    """Mean pairwise correlation at every window end instant.

    ``pair_r`` (windows x pairs, upper-triangle order) is kept only when
    requested; ``nan`` entries mark pairs with a constant window.
    """

    times: np.ndarray
    window: int
    n_links: int
    mean_r: np.ndarray
    n_valid_pairs: np.ndarray
    pair_r: np.ndarray | None = None

    @property
    def link_pairs(self) -> int:
        return pair_count(self.n_links)

    def at(self, t: float) -> float:
        idx = np.flatnonzero(np.isclose(self.times, t))
        if idx.size == 0:
            raise KeyError(f"no window ends at t={t}")
        return float(self.mean_r[idx[0]])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CORR_HEADER)
        for t, r, n in zip(self.times, self.mean_r, self.n_valid_pairs):
            w.writerow([f"{t:g}", "nan" if np.isnan(r) else f"{r:.6f}", int(n)])
        return buf.getvalue()

    def pairs_csv(self, link_ids) -> str:
        if self.pair_r is None:
            raise ValueError("trace was computed without per-pair values")
        iu = np.triu_indices(self.n_links, k=1)
        names = [f"{link_ids[a]}-{link_ids[b]}" for a, b in zip(*iu)]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *names])
        for t, row in zip(self.times, self.pair_r):
            w.writerow([f"{t:g}", *("nan" if np.isnan(v) else f"{v:.6f}" for v in row)])
        return buf.getvalue()


def sliding_mean_corr(series_set, window: int = 30, times=None, keep_pairs: bool = False
                      ) -> CorrelationTrace:
    """Trailing-window correlation for every pair of rows in ``series_set``.

    ``series_set`` is ``(n_links, n_samples)``. The trace has one entry per
    window end, the first at sample ``window - 1``. Pairs with a constant
    window are left out of the mean and counted out of ``n_valid_pairs``.
    """
    data = np.asarray(series_set, dtype=float)
    if data.ndim != 2:
        raise ValueError("series_set must be 2-D (links x samples)")
    n, length = data.shape
    if window < 2:
        raise ValueError("window must be >= 2")
    if n < 2:
        raise ValueError("need at least two series")
    if length < window:
        raise ValueError(f"series of length {length} shorter than window {window}")
    times = np.arange(length, dtype=float) if times is None else np.asarray(times, dtype=float)
    if times.shape != (length,):
        raise ValueError("times must align with the samples")

    win = sliding_window_view(data, window, axis=1)          # (n, W, window)
    centered = win - win.mean(axis=2, keepdims=True)
    norms = np.sqrt(np.einsum("nwk,nwk->wn", centered, centered))
    constant = (np.ptp(win, axis=2) == 0).T                 # (W, n)
    cov = np.einsum("awk,bwk->wab", centered, centered)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = cov / (norms[:, :, None] * norms[:, None, :])
    r = np.clip(r, -1.0, 1.0)
    bad = constant[:, :, None] | constant[:, None, :]
    r[bad] = np.nan

    iu = np.triu_indices(n, k=1)
    pairs = r[:, iu[0], iu[1]]
    valid = (~np.isnan(pairs)).sum(axis=1)
    with np.errstate(invalid="ignore"):
        mean_r = np.where(valid > 0, np.nansum(pairs, axis=1) / np.maximum(valid, 1), np.nan)
    return CorrelationTrace(
        times=times[window - 1:],
        window=window,
        n_links=n,
        mean_r=mean_r,
        n_valid_pairs=valid,
        pair_r=pairs if keep_pairs else None,
    )


@dataclass(frozen=True)
class AlarmPolicy:
    threshold: float = 0.5
    consecutive: int = 3

    def __post_init__(self):
        # 1.0 is admitted as a never-firing setting on noisy traces
        if not -1 < self.threshold <= 1:
            raise ValueError("threshold must lie in (-1, 1]")
        if self.consecutive < 1:
            raise ValueError("consecutive must be >= 1")


def alarm(trace: CorrelationTrace, policy: AlarmPolicy = AlarmPolicy()) -> float | None:
    """Instant completing the first run of ``consecutive`` windows at or above threshold."""
    run = 0
    for t, r in zip(trace.times, trace.mean_r):
        run = run + 1 if (not np.isnan(r) and r >= policy.threshold) else 0
        if run >= policy.consecutive:
            return float(t)
    return None


class CorrelationDetector(BaseEstimator):
    """Estimator wrapper: rows of ``X`` are poll instants, columns are links.

    ``transform`` returns the mean_r trace (``nan``-padded for the first
    ``window - 1`` rows); ``predict`` flags rows from the first alarm on.
    """

    def __init__(self, window=30, threshold=0.5, consecutive=3):
        self.window = window
        self.threshold = threshold
        self.consecutive = consecutive

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=self.window, ensure_min_features=2)
        self.policy_ = AlarmPolicy(self.threshold, self.consecutive)
        self.n_features_in_ = X.shape[1]
        return self

    def trace(self, X, times=None) -> CorrelationTrace:
        check_is_fitted(self)
        X = check_array(X, ensure_min_samples=self.window, ensure_min_features=2)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} links, got {X.shape[1]}")
        return sliding_mean_corr(X.T, self.window, times)

    def transform(self, X) -> np.ndarray:
        tr = self.trace(X)
        return np.concatenate([np.full(self.window - 1, np.nan), tr.mean_r])

    def predict(self, X) -> np.ndarray:
        tr = self.trace(X)
        t = alarm(tr, self.policy_)
        out = np.zeros(len(X), dtype=bool)
        if t is not None:
            out[int(t):] = True
        return out
