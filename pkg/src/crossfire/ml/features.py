"""Link-volume feature matrices."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.preprocessing import StandardScaler

from ..engine import LinkSampleSeries


@dataclass(frozen=True)
class FeatureMatrix:
    X: np.ndarray
    y: np.ndarray
    times: np.ndarray
    columns: tuple[int, ...]

    def __post_init__(self):
        if self.X.ndim != 2 or self.X.shape[1] != len(self.columns):
            raise ValueError("X columns do not match the manifest")
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError("labels do not align with rows")
        if not np.isfinite(self.X).all():
            raise ValueError("feature matrix has missing cells")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def select(self, columns) -> FeatureMatrix:
        pos = {c: i for i, c in enumerate(self.columns)}
        try:
            idx = [pos[c] for c in columns]
        except KeyError as exc:
            raise KeyError(f"column {exc.args[0]!r} not in feature matrix") from None
        return replace(self, X=self.X[:, idx], columns=tuple(columns))


def concat(matrices) -> FeatureMatrix:
    matrices = list(matrices)
    cols = matrices[0].columns
    if any(m.columns != cols for m in matrices):
        raise ValueError("cannot stack matrices with different column manifests")
    return FeatureMatrix(
        np.vstack([m.X for m in matrices]),
        np.concatenate([m.y for m in matrices]),
        np.concatenate([m.times for m in matrices]),
        cols,
    )


def extract_features(
    series: LinkSampleSeries,
    link_selection,
    normalize: bool = False,
    reference: FeatureMatrix | None = None,
    warmup_positive: bool = True,
) -> FeatureMatrix:
    """One row per poll instant of carried bits on each selected link.

    Rows labelled ``warmup`` count as attack unless ``warmup_positive`` is
    off, in which case they are dropped. With ``normalize`` each column is
    standardized using ``reference`` statistics (the training split) or,
    when no reference is given, this matrix's own.
    """
    links = [getattr(lk, "id", lk) for lk in link_selection]
    if not links:
        raise ValueError("empty link selection")
    X = series.bits(links).T
    labels = np.asarray(series.labels)
    keep = np.ones(labels.size, dtype=bool) if warmup_positive else labels != "warmup"
    y = np.isin(labels, ("warmup", "attack")).astype(np.int64)
    fm = FeatureMatrix(X[keep], y[keep], series.times[keep], tuple(links))
    if normalize:
        fm = standardize(fm, reference if reference is not None else fm)
    return fm


def standardize(fm: FeatureMatrix, reference: FeatureMatrix) -> FeatureMatrix:
    if reference.columns != fm.columns:
        raise ValueError("reference columns differ")
    scaler = StandardScaler().fit(reference.X)
    return replace(fm, X=scaler.transform(fm.X))


class LinkVolumes(TransformerMixin, BaseEstimator):
    """Turns a list of runs into stacked feature rows for a fixed link set.

    ``fit`` learns per-column mean and scale from the training runs only;
    ``transform`` applies them to any runs.
    """

    def __init__(self, links=None, normalize=True, warmup_positive=True):
        self.links = links
        self.normalize = normalize
        self.warmup_positive = warmup_positive

    def _raw(self, runs) -> FeatureMatrix:
        return concat(
            extract_features(s, self.links, warmup_positive=self.warmup_positive) for s in runs
        )

    def fit(self, runs, y=None):
        train = self._raw(runs)
        self.scaler_ = StandardScaler(with_mean=self.normalize, with_std=self.normalize).fit(train.X)
        self.n_features_out_ = train.X.shape[1]
        return self

    def transform(self, runs) -> FeatureMatrix:
        fm = self._raw(runs)
        return replace(fm, X=self.scaler_.transform(fm.X))
