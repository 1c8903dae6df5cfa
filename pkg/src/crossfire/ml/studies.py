"""Train/evaluate loops behind the distribution, feature-count and visibility studies."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from ..config import ScenarioConfig
from ..scenarios import monitored_links, simulate, topology_from
from ..topology import links_at_level
from .features import FeatureMatrix, LinkVolumes
from .forest import RandomForest
from .metrics import rank_auc
from .svm import LinearSVM

STUDY_KINDS = ("distribution", "feature_count", "visibility")
STUDY_HEADER = ("config", "seed", "auc")


def train_linear_svm(train: FeatureMatrix, regularization=1.0, epochs=200, seed=0) -> LinearSVM:
    return LinearSVM(regularization=regularization, epochs=epochs, random_state=seed).fit(
        train.X, train.y)


def train_random_forest(train: FeatureMatrix, n_trees=100, max_depth=12, features_per_split="sqrt",
                        seed=0) -> RandomForest:
    return RandomForest(n_estimators=n_trees, max_depth=max_depth, max_features=features_per_split,
                        random_state=seed).fit(train.X, train.y)


def predict_scores(model, rows) -> np.ndarray:
    """Higher means more attack-like: SVM margin or forest vote share."""
    X = rows.X if isinstance(rows, FeatureMatrix) else np.asarray(rows, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features_in_:
        raise ValueError(f"model expects {model.n_features_in_} columns, got {X.shape[-1]}")
    return model.decision_function(X)


def run_seeds(seed: int, n_train: int, n_test: int) -> tuple[list[int], list[int]]:
    """Disjoint scenario seeds for the training and test runs of one study seed."""
    base = 1000 * int(seed)
    return [base + i for i in range(n_train)], [base + 500 + i for i in range(n_test)]


def evaluate(cfg: ScenarioConfig, n_subtrees: int, links, seed: int) -> dict[str, float]:
    """AUC of every configured model on fresh test runs."""
    d = cfg.detect
    train_ids, test_ids = run_seeds(seed, d.train_runs, d.test_runs)
    train_runs = [simulate(cfg, s, n_subtrees=n_subtrees) for s in train_ids]
    test_runs = [simulate(cfg, s, n_subtrees=n_subtrees) for s in test_ids]
    vol = LinkVolumes(list(links), normalize=True, warmup_positive=d.warmup_positive).fit(train_runs)
    train, test = vol.transform(train_runs), vol.transform(test_runs)
    out = {}
    for name in d.models:
        if name == "svm":
            model = train_linear_svm(train, d.svm_regularization, d.svm_epochs, seed)
        else:
            model = train_random_forest(train, d.forest_trees, d.forest_depth, d.forest_features, seed)
        out[name] = rank_auc(predict_scores(model, test), test.y)
    return out


@dataclass
class StudyReport:
    kind: str
    rows: list[tuple[str, int, float]] = field(default_factory=list)

    def configs(self) -> list[str]:
        seen: dict[str, None] = {}
        for c, _, _ in self.rows:
            seen.setdefault(c)
        return list(seen)

    def aucs(self, config: str) -> np.ndarray:
        return np.array([a for c, _, a in self.rows if c == config])

    def mean(self, config: str) -> float:
        return float(self.aucs(config).mean())

    def summary(self) -> dict[str, dict[str, float]]:
        return {c: {"mean": self.mean(c), "std": float(self.aucs(c).std()),
                    "n": int(self.aucs(c).size)} for c in self.configs()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(STUDY_HEADER)
        for c in self.configs():
            for cc, s, a in self.rows:
                if cc == c:
                    w.writerow([c, s, f"{a:.6f}"])
            w.writerow([c, "mean", f"{self.mean(c):.6f}"])
        return buf.getvalue()


def _subset_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), stream]))


def feature_subsets(edges, sizes, seed: int) -> dict[int, list[int]]:
    """Nested random edge subsets: each size is a prefix of one seeded permutation."""
    edges = list(edges)
    bad = [k for k in sizes if not 1 <= k <= len(edges)]
    if bad:
        raise ValueError(f"subset sizes {bad} outside [1, {len(edges)}]")
    order = [edges[i] for i in _subset_rng(seed, 21).permutation(len(edges))]
    return {k: sorted(order[:k]) for k in sizes}


def visibility_sets(topology, edges, k: int, seed: int) -> dict[int, list[int]]:
    """``k`` edges, ``k`` + one uplink, all edges, all edges + the same uplink."""
    edges = list(edges)
    if not 1 <= k <= len(edges):
        raise ValueError(f"visibility_edges must be in [1, {len(edges)}]")
    rng = _subset_rng(seed, 22)
    subset = sorted(edges[i] for i in rng.choice(len(edges), k, replace=False))
    ups = [lk.id for lk in links_at_level(topology, 1)]
    up = ups[int(rng.integers(len(ups)))]
    return {k: subset, k + 1: subset + [up], len(edges): edges, len(edges) + 1: edges + [up]}


def run_study(kind: str, cfg: ScenarioConfig, seeds) -> StudyReport:
    """Per-config AUC for every model and seed.

    Config labels are ``<model>_<n>ST`` (distribution), ``<model>_<k>f``
    (feature_count, on ``topology.n_subtrees``) and ``<model>_<dims>d``
    (visibility, on ``detect.visibility_subtrees``).
    """
    if kind not in STUDY_KINDS:
        raise ValueError(f"unknown study {kind!r}; choose from {STUDY_KINDS}")
    d = cfg.detect
    report = StudyReport(kind)
    cells: list[tuple[str, int, float]] = []
    for seed in seeds:
        if kind == "distribution":
            for n in d.topologies:
                edges = monitored_links(cfg, topology_from(cfg, n))
                for m, auc in evaluate(cfg, n, edges, seed).items():
                    cells.append((f"{m}_{n}ST", seed, auc))
        elif kind == "feature_count":
            n = cfg.topology.n_subtrees
            edges = monitored_links(cfg, topology_from(cfg, n))
            for k, links in feature_subsets(edges, d.feature_sizes, seed).items():
                for m, auc in evaluate(cfg, n, links, seed).items():
                    cells.append((f"{m}_{k}f", seed, auc))
        else:
            n = d.visibility_subtrees
            topo = topology_from(cfg, n)
            edges = monitored_links(cfg, topo)
            for dims, links in visibility_sets(topo, edges, d.visibility_edges, seed).items():
                for m, auc in evaluate(cfg, n, links, seed).items():
                    cells.append((f"{m}_{dims}d", seed, auc))
    # group by config, seeds in the order given
    order: dict[str, None] = {}
    for c, _, _ in cells:
        order.setdefault(c)
    report.rows = [cell for c in order for cell in cells if cell[0] == c]
    return report
