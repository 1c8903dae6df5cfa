"""Supervised detectors over link-volume features."""

from .features import FeatureMatrix, LinkVolumes, extract_features
from .forest import DecisionTree, RandomForest
from .metrics import RocReport, rank_auc, roc_auc, roc_curve
from .svm import LinearSVM

__all__ = [
    "DecisionTree", "FeatureMatrix", "LinearSVM", "LinkVolumes", "RandomForest", "RocReport",
    "extract_features", "rank_auc", "roc_auc", "roc_curve",
]
