import itertools
import json

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from botalign.models import (
    BaselineModel, ClassWeight, Criterion, ForestConfig, LogisticModel, LogRegConfig, MaxFeatures,
    Normalization, feature_importance, fit_normalizer, load_model, model_to_dict, predict,
    sample_weights, save_model, train_baselines, train_forest, train_logreg,
)
from botalign.models import forest as forest_mod
from botalign.models import logreg as logreg_mod

from .oracles import cart_predict, naive_cart

# -- normalization ----------------------------------------------------------


def test_standardize_example():
    n = fit_normalizer(np.array([[1.0], [3.0]]), "standardize")
    assert n.apply(np.array([[1.0], [3.0]])).ravel().tolist() == [-1.0, 1.0]


def test_unit_normalize_example():
    n = fit_normalizer(np.array([[3.0, 4.0], [0.0, 0.0]]), Normalization.UNIT)
    assert n.apply(np.array([[3.0, 4.0], [0.0, 0.0]])).tolist() == [[0.6, 0.8], [0.0, 0.0]]


def test_standardize_constant_column_and_width_check():
    X = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
    n = fit_normalizer(X, "standardize")
    assert not n.apply(X)[:, 1].any()
    with pytest.raises(ValueError, match="columns"):
        n.apply(np.zeros((1, 3)))


@settings(max_examples=50)
@given(st.integers(2, 30), st.integers(1, 5), st.integers(0, 1000))
def test_standardize_moments(n, d, seed):
    X = np.random.default_rng(seed).normal(3, 2, (n, d))
    Z = fit_normalizer(X, "standardize").apply(X)
    assert np.allclose(Z.mean(axis=0), 0, atol=1e-9)
    assert np.allclose(Z.std(axis=0), 1, atol=1e-9)


def test_sparse_and_dense_agree():
    X = np.random.default_rng(0).random((20, 6)) * (np.random.default_rng(1).random((20, 6)) > 0.5)
    for kind in Normalization:
        a = fit_normalizer(X, kind).apply(X)
        b = fit_normalizer(sp.csr_matrix(X), kind).apply(sp.csr_matrix(X))
        b = b.toarray() if sp.issparse(b) else b
        assert np.allclose(a, b, atol=1e-12)


# -- logistic regression ----------------------------------------------------

TOY_X = np.array([[0.0, 1.0], [1.0, 0.5], [2.0, 2.0], [0.5, 2.5],
                  [3.0, 1.0], [2.5, 3.0], [1.5, 0.0], [3.5, 2.5]])
TOY_Y = np.array([0, 0, 1, 0, 1, 1, 0, 1])


def _objective(theta, X, y, C):
    z = X @ theta[:2] + theta[2]
    ypm = 2 * y - 1
    return 0.5 * theta[:2] @ theta[:2] + C * np.sum(np.logaddexp(0, -ypm * z))


def _grid_minimize(f, center, width, rounds=25, k=11):
    """Zooming exhaustive grid search on a convex function."""
    best = np.asarray(center, dtype=float)
    for _ in range(rounds):
        axes = [np.linspace(c - width, c + width, k) for c in best]
        pts = np.array(list(itertools.product(*axes)))
        best = pts[np.argmin([f(p) for p in pts])]
        width *= 0.5
    return best


def test_logreg_matches_brute_force_grid():
    model = train_logreg(TOY_X, TOY_Y, LogRegConfig(c_value=1.0))
    oracle = _grid_minimize(lambda t: _objective(t, TOY_X, TOY_Y, 1.0), [0, 0, 0], 8.0)
    assert model.converged
    assert np.allclose([*model.weights, model.intercept], oracle, atol=1e-3)


def test_logreg_matches_sklearn():
    lm = pytest.importorskip("sklearn.linear_model")
    ref = lm.LogisticRegression(C=0.3, tol=1e-10, max_iter=10000).fit(TOY_X, TOY_Y)
    model = train_logreg(TOY_X, TOY_Y, LogRegConfig(c_value=0.3))
    assert np.allclose(model.weights, ref.coef_.ravel(), atol=1e-5)
    assert model.intercept == pytest.approx(ref.intercept_[0], abs=1e-5)


def test_logreg_two_starts_agree():
    cfg = LogRegConfig(c_value=10.0, class_weight="balanced")
    a = train_logreg(TOY_X[:7], TOY_Y[:7], cfg)
    b = train_logreg(TOY_X[:7], TOY_Y[:7], cfg, x0=np.array([5.0, -5.0, 3.0]))
    assert np.allclose([*a.weights, a.intercept], [*b.weights, b.intercept], atol=1e-3)


def test_logreg_tiny_c_predicts_weighted_prior():
    X = np.random.default_rng(0).normal(size=(40, 3))
    y = np.array([1] * 10 + [0] * 30)
    m = train_logreg(X, y, LogRegConfig(c_value=1e-8))
    assert m.converged
    assert np.allclose(m.scores(X), 0.25, atol=1e-3)
    m = train_logreg(X, y, LogRegConfig(c_value=1e-8, class_weight="balanced"))
    assert np.allclose(m.scores(X), 0.5, atol=1e-3)


def test_logreg_separable_reaches_full_training_accuracy():
    X = np.array([[-2.0], [-1.0], [-0.5], [0.5], [1.0], [2.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    m = train_logreg(X, y, LogRegConfig(c_value=10.0))
    assert (m.predict(X) == y).all()


def test_logreg_sparse_input_matches_dense():
    cfg = LogRegConfig(c_value=2.0, normalization="unit_normalize")
    a = train_logreg(TOY_X, TOY_Y, cfg)
    b = train_logreg(sp.csr_matrix(TOY_X), TOY_Y, cfg)
    assert np.allclose(a.weights, b.weights, atol=1e-8)


def test_balanced_weights_equalize_classes():
    y = np.array([1, 0, 0, 0, 0, 1, 0])
    s = sample_weights(y, ClassWeight.BALANCED)
    assert s[y == 1].sum() == pytest.approx(s[y == 0].sum())


def test_zero_model_scores_half_and_ties_to_zero():
    m = LogisticModel(np.zeros(2), 0.0, fit_normalizer(TOY_X, "none"), LogRegConfig())
    assert m.scores(TOY_X).tolist() == [0.5] * 8 and not m.predict(TOY_X).any()
    with pytest.raises(ValueError):
        m.predict(np.zeros((1, 3)))


def test_logreg_grid_order_and_validation():
    grid = logreg_mod.full_grid()
    assert len(grid) == 36
    assert (grid[0].c_value, grid[0].class_weight, grid[0].normalization) == (
        1e-4, ClassWeight.NONE, Normalization.STANDARDIZE)
    assert grid[1].normalization is Normalization.UNIT and grid[3].class_weight is ClassWeight.BALANCED
    with pytest.raises(ValueError):
        LogRegConfig(class_weight="balanced_subsample")
    with pytest.raises(ValueError):
        train_logreg(TOY_X, np.zeros(8), LogRegConfig())


# -- forest ------------------------------------------------------------------


def _nested(tree, node=0):
    f = int(tree.feature[node])
    if f < 0:
        return ("leaf", int(tree.value[node]))
    return ("split", f, float(tree.threshold[node]),
            _nested(tree, int(tree.left[node])), _nested(tree, int(tree.right[node])))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(4, 25), st.integers(1, 4))
def test_single_tree_equals_cart_oracle(seed, n, d):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 4, (n, d)).astype(float)
    y = rng.integers(0, 2, n)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    if y.sum() * 2 > n:
        y = 1 - y  # keep the tie class at 0, like the oracle
    cfg = ForestConfig(n_trees=1, max_features="all", bootstrap=False, seed=seed)
    forest = train_forest(X, y, cfg)
    oracle = naive_cart(X.tolist(), y.tolist())
    assert _nested(forest.trees[0]) == oracle
    grid = np.array(list(itertools.product(np.arange(-0.5, 4.0, 0.5), repeat=d)))
    assert forest.predict(grid).tolist() == [cart_predict(oracle, x) for x in grid]


def test_collapsed_forest_ignores_seed():
    rng = np.random.default_rng(3)
    X, y = rng.normal(size=(30, 4)), rng.integers(0, 2, 30)
    a = train_forest(X, y, ForestConfig(n_trees=1, max_features="all", bootstrap=False, seed=1))
    b = train_forest(X, y, ForestConfig(n_trees=1, max_features="all", bootstrap=False, seed=2))
    assert a.trees[0].to_dict() == b.trees[0].to_dict()


def _data(seed=0, n=80, d=6):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + 0.5 * rng.normal(size=n) > 0).astype(int)
    return X, y


@pytest.mark.parametrize("cfg", forest_mod.full_grid(n_trees=5, seed=4)[::5])
def test_forest_grid_configs_train(cfg):
    X, y = _data()
    m = train_forest(X, y, cfg)
    assert abs(m.importances.sum() - 1) <= 1e-9
    assert set(np.unique(m.predict(X))) <= {0, 1}


def test_forest_separable_and_single_feature_importance():
    X = np.column_stack([np.linspace(-1, 1, 40), np.zeros(40), np.ones(40)])
    y = (X[:, 0] >= 0).astype(int)
    m = train_forest(X, y, ForestConfig(n_trees=20, seed=1))
    assert (m.predict(X) == y).all()
    ranked = feature_importance(m, ["x", "zero", "one"])
    assert ranked == [("x", 1.0), ("one", 0.0), ("zero", 0.0)]


def test_forest_determinism_and_worker_count():
    X, y = _data(1)
    cfg = ForestConfig(n_trees=30, seed=9, class_weight="balanced_subsample", criterion="entropy")
    a = json.dumps(model_to_dict(train_forest(X, y, cfg)))
    b = json.dumps(model_to_dict(train_forest(X, y, cfg)))
    c = json.dumps(model_to_dict(train_forest(X, y, cfg, n_jobs=2)))
    assert a == b == c


def test_forest_vote_majority_and_tie():
    X, y = _data(2)
    m = train_forest(X, y, ForestConfig(n_trees=2, seed=0))
    v = m.votes(X)
    assert (m.predict(X)[v == 1] == m.tie_class).all()
    assert (m.predict(X)[v == 2] == 1).all() and (m.predict(X)[v == 0] == 0).all()


def test_forest_rejects_bad_input():
    X, y = _data()
    m = train_forest(X, y, ForestConfig(n_trees=2))
    with pytest.raises(ValueError):
        m.predict(X[:, :3])
    with pytest.raises(ValueError):
        train_forest(X, np.ones(len(y)), ForestConfig(n_trees=2))


def test_max_features_counts():
    assert [m.count(17) for m in MaxFeatures] == [4, 4, 17]
    assert MaxFeatures.LOG2.count(1) == 1


def test_importance_requires_forest():
    m = train_baselines([0, 1])["most_frequent"]
    with pytest.raises(TypeError):
        feature_importance(m, [])


# -- baselines and serialization ---------------------------------------------


def test_baselines():
    b = train_baselines([0, 0, 1], seed=5)
    X = np.zeros((4, 1))
    assert b["most_frequent"].predict(X).tolist() == [0] * 4
    assert b["most_infrequent"].predict(X).tolist() == [1] * 4
    draws = b["stratified"].predict(np.zeros((30000, 1)))
    assert abs(draws.mean() - 1 / 3) <= 0.01
    assert (b["stratified"].predict(X) == b["stratified"].predict(X)).all()


def test_baseline_ties_go_to_human_human():
    b = train_baselines([0, 1])
    assert b["most_frequent"].constant == 0 and b["most_infrequent"].constant == 0


@pytest.mark.parametrize("make", [
    lambda X, y: train_logreg(X, y, LogRegConfig(c_value=0.5, normalization="standardize")),
    lambda X, y: train_forest(X, y, ForestConfig(n_trees=3, seed=2)),
    lambda X, y: train_baselines(y, seed=3)["stratified"],
])
def test_model_file_round_trip(tmp_path, make):
    X, y = _data(4)
    m = make(X, y)
    save_model(m, tmp_path / "m.json", [f"f{j}" for j in range(X.shape[1])])
    back = load_model(tmp_path / "m.json")
    assert type(back) is type(m)
    assert (predict(back, X) == predict(m, X)).all()
    assert np.allclose(back.scores(X), m.scores(X))


def test_model_file_requires_version(tmp_path):
    p = tmp_path / "m.json"
    obj = model_to_dict(BaselineModel("most_frequent", 0))
    del obj["version"]
    p.write_text(json.dumps(obj))
    with pytest.raises(ValueError):
        load_model(p)


def test_forest_entropy_and_criteria_differ_only_in_impurity():
    X, y = _data(5)
    for crit in Criterion:
        m = train_forest(X, y, ForestConfig(n_trees=1, max_features="all", bootstrap=False, criterion=crit))
        assert (m.predict(X) == y).all()
