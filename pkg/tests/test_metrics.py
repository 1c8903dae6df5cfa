import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crossfire.ml.metrics import rank_auc, roc_auc, roc_curve

from .oracles import auc_pairs


def test_examples():
    assert rank_auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 1.0
    assert rank_auc([0.3] * 6, [1, 0, 1, 0, 0, 1]) == 0.5
    assert rank_auc([0.9, 0.8, 0.3, 0.1], [1, 0, 1, 0]) == pytest.approx(0.75)
    assert rank_auc([0.9, 0.8, 0.3, 0.1], ["attack", "normal", "attack", "normal"]) == 0.75
    with pytest.raises(ValueError):
        rank_auc([0.1, 0.2], [1, 1])


scored = st.lists(st.tuples(st.integers(-20, 20), st.booleans()), min_size=2, max_size=60).filter(
    lambda v: 0 < sum(b for _, b in v) < len(v))


@given(scored)
def test_rank_equals_pairs_and_trapezoid(v):
    s = np.array([a for a, _ in v], dtype=float) / 4
    y = np.array([b for _, b in v])
    rep = roc_auc(s, y)
    assert rep.auc == pytest.approx(auc_pairs(s.tolist(), y.tolist()), abs=1e-12)
    assert abs(rep.auc - rep.auc_trapezoid) < 1e-12
    assert (np.diff(rep.fpr) >= 0).all() and (np.diff(rep.tpr) >= 0).all()
    assert rep.fpr[-1] == 1 and rep.tpr[-1] == 1


@given(scored, st.sampled_from(["exp", "cube", "affine"]))
def test_monotone_transform_invariance(v, kind):
    s = np.array([a for a, _ in v], dtype=float) / 10
    y = np.array([b for _, b in v])
    f = {"exp": np.exp, "cube": lambda z: z ** 3, "affine": lambda z: 3 * z - 7}[kind]
    assert rank_auc(f(s), y) == pytest.approx(rank_auc(s, y), abs=1e-12)


def test_curve_thresholds_descend():
    fpr, tpr, thr = roc_curve([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    assert thr[0] == np.inf and (np.diff(thr) < 0).all()
    assert fpr[0] == tpr[0] == 0
