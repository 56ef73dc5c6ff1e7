import json
import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from peakcast.dataset import PeakSample
from peakcast.errors import DegenerateTargetError, SingularDesignError
from peakcast.models.linear import design_matrix
from peakcast.selection import (
    aic,
    aicc,
    all_subsets,
    best_per_criterion,
    bic,
    cv_press,
    hat_diagonals,
    rbar2,
    score_all_subsets,
    score_subset,
    scores_csv,
    scores_json,
    sort_scores,
)

from oracles import normal_equation_scores


def make_samples(X, y):
    return [
        PeakSample(date.fromordinal(736000 + i), 13, float(t), tuple(float(v) for v in row), {})
        for i, (row, t) in enumerate(zip(X, y))
    ]


def test_hat_examples():
    assert np.allclose(hat_diagonals(np.ones((7, 1))), 1 / 7)
    assert np.allclose(hat_diagonals(np.array([[1.0, 0.0], [1.0, 1.0]])), [1, 1])
    rng = np.random.default_rng(3)
    D = design_matrix(rng.normal(size=(25, 3)))
    h = hat_diagonals(D)
    assert h.sum() == pytest.approx(4, abs=1e-10)
    assert np.all((h >= 0) & (h <= 1))


def test_hat_rank_deficient():
    D = design_matrix(np.column_stack([np.arange(6.0), 2 * np.arange(6.0)]))
    with pytest.raises(SingularDesignError):
        hat_diagonals(D)


def test_rbar2_examples():
    assert rbar2(0.0, 5.0, 21, 4) == 1.0
    assert rbar2(5.0, 5.0, 21, 4) == pytest.approx(-0.25)
    assert rbar2(3.0, 5.0, 21, 0) == pytest.approx(1 - 3 / 5)
    with pytest.raises(DegenerateTargetError):
        rbar2(0.0, 0.0, 10, 1)


def test_aic_examples():
    assert aic(10.0, 10, 1) == pytest.approx(6)
    assert aic(10.0, 10, 3) == pytest.approx(10)
    assert aic(20.0, 10, 2) == pytest.approx(14.9315, abs=1e-4)
    with pytest.raises(DegenerateTargetError):
        aic(0.0, 10, 1)


def test_aicc_examples():
    assert aicc(6.0, 11, 1) == pytest.approx(6.4444, abs=1e-4)
    assert aicc(3.0, 11, 0) == 3.0
    gaps = [aicc(0.0, n, 3) for n in (10, 20, 50, 200, 2000)]
    assert all(a > b for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 0.05
    with pytest.raises(ValueError):
        aicc(1.0, 3, 2)


def test_bic_examples():
    assert bic(10.0, 10, 1) == pytest.approx(13.8155, abs=1e-4)
    assert bic(10.0, 10, 1, "standard") == pytest.approx(6.9078, abs=1e-4)
    with pytest.raises(DegenerateTargetError):
        bic(0.0, 10, 1)
    with pytest.raises(ValueError):
        bic(1.0, 10, 1, "other")


def test_cv_examples():
    assert cv_press([0, 0, 0], [0.1, 0.2, 0.3]) == 0
    assert cv_press([-1, 1], [0.5, 0.5]) == 4
    with pytest.raises(SingularDesignError):
        cv_press([0.0, 0.0], [1.0, 1.0])


def test_all_subsets_order():
    subs = all_subsets()
    assert len(subs) == 15 and subs[0] == "SDRT" and subs[-4:] == ["S", "D", "R", "T"]


def test_perfect_fit_on_D_propagates():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 4))
    y = 5.0 + 3.0 * X[:, 1]
    scores = {s.subset: s for s in score_all_subsets(make_samples(X, y))}
    for label in ("D", "SD", "DR", "DT", "SDR", "SDT", "DRT", "SDRT"):
        assert scores[label].rmse < 1e-12
        assert scores[label].rbar2 == pytest.approx(1.0, abs=1e-12)
    assert scores["S"].rmse > 1.0
    assert best_per_criterion(list(scores.values()))["rmse"] in {k for k in scores if "D" in k}


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("form, factor", [("printed", 2.0), ("standard", 1.0)])
def test_scores_match_normal_equation_oracle(seed, form, factor):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 4)) * [10, 2, 5, 2]
    y = 3 + X @ rng.normal(size=4) + rng.normal(size=50)
    for s in score_all_subsets(make_samples(X, y), bic_form=form):
        cols = ["SDRT".index(c) for c in s.subset]
        ref = normal_equation_scores(X[:, cols], y, factor)
        for field in ("rmse", "rbar2", "aic", "aicc", "bic", "cv", "sse"):
            assert getattr(s, field) == pytest.approx(ref[field], rel=1e-8)
        assert hat_diagonals(design_matrix(X[:, cols])) == pytest.approx(ref["h"], rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(9, 60))
def test_lattice_properties(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    y = X @ rng.normal(size=4) + rng.normal(size=n)
    scores = {s.subset: s for s in score_all_subsets(make_samples(X, y))}
    for a, sa in scores.items():
        k = len(a)
        assert sa.aicc >= sa.aic
        h = hat_diagonals(design_matrix(X[:, ["SDRT".index(c) for c in a]]))
        assert h.sum() == pytest.approx(k + 1, abs=1e-10)
        for b, sb in scores.items():
            if set(a) < set(b):
                assert sb.sse <= sa.sse * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(9, 60))
def test_rankings_match_exhaustive_oracle(seed, n):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    y = X @ rng.normal(size=4) + rng.normal(size=n)
    scores = score_all_subsets(make_samples(X, y))
    best = best_per_criterion(scores)
    oracle = {
        label: normal_equation_scores(X[:, ["SDRT".index(c) for c in label]], y)
        for label in all_subsets()
    }
    for c in ("rmse", "aic", "aicc", "bic", "cv"):
        vals = {lbl: r[c] for lbl, r in oracle.items()}
        assert vals[best[c]] == pytest.approx(min(vals.values()), rel=1e-10)
    vals = {lbl: r["rbar2"] for lbl, r in oracle.items()}
    assert vals[best["rbar2"]] == pytest.approx(max(vals.values()), rel=1e-10)


def test_aicc_equals_aic_for_intercept_only():
    rng = np.random.default_rng(1)
    y = rng.normal(size=20)
    s = score_subset(np.zeros((20, 0)), y, "")
    assert s.aicc == s.aic


def test_too_few_samples():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(7, 4))
    with pytest.raises(ValueError, match="at least 8"):
        score_all_subsets(make_samples(X, X[:, 0]))


def test_single_predictor_subset_list():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(12, 4))
    y = X[:, 3] + rng.normal(size=12)
    scores = score_all_subsets(make_samples(X, y), predictors="T")
    assert [s.subset for s in scores] == ["T"]


def test_reports():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(40, 4))
    y = X @ [1, 0, -1, 0.5] + rng.normal(size=40)
    scores = score_all_subsets(make_samples(X, y))
    lines = scores_csv(scores).splitlines()
    assert lines[0] == "subset,rmse,rbar2,aic,aicc,bic,cv"
    assert len(lines) == 16
    assert float(lines[1].split(",")[1]) == scores[0].rmse
    doc = json.loads(scores_json(scores, horizon=None))
    assert doc["best"] == best_per_criterion(scores)
    assert len(doc["rows"]) == 15
    by_aic = sort_scores(scores, "aic")
    assert [s.aic for s in by_aic] == sorted(s.aic for s in scores)
    by_r = sort_scores(scores, "rbar2")
    assert by_r[0].subset == best_per_criterion(scores)["rbar2"]
