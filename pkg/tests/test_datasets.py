import numpy as np
import pytest

from src.constants import Task
from src.datasets import make_classification, make_regression, split_and_standardize


def test_regression_shape_and_weights():
    ds = make_regression(n=100, p=20, n_informative=5, seed=0)
    assert ds.X.shape == (100, 20)
    assert ds.task == Task.REGRESSION
    assert len(ds.informative) == 5
    assert np.count_nonzero(ds.coef) == 5
    assert np.all((ds.coef[list(ds.informative)] > 0) & (ds.coef[list(ds.informative)] < 100))
    np.testing.assert_allclose(ds.y, ds.X @ ds.coef)


def test_regression_is_deterministic():
    a = make_regression(n=50, p=8, n_informative=3, seed=(1, 2))
    b = make_regression(n=50, p=8, n_informative=3, seed=(1, 2))
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.y, b.y)
    c = make_regression(n=50, p=8, n_informative=3, seed=(1, 3))
    assert not np.array_equal(a.X, c.X)


def test_regression_noise():
    ds = make_regression(n=200, p=4, n_informative=2, noise_sd=1.0, seed=5)
    residual = ds.y - ds.X @ ds.coef
    assert 0.7 < residual.std() < 1.3


def test_regression_target_correlates_with_informative_columns():
    ds = make_regression(n=10_000, p=20, n_informative=5, seed=6)
    corr = np.array([np.corrcoef(ds.X[:, j], ds.y)[0, 1] for j in range(20)])
    informative = list(ds.informative)
    others = [j for j in range(20) if j not in ds.informative]
    # noiseless: corr(y, x_j) = w_j / ||w|| for independent unit columns
    np.testing.assert_allclose(corr[informative], ds.coef[informative] / np.linalg.norm(ds.coef), atol=0.04)
    assert corr[informative].max() > 0.4
    assert np.all(np.abs(corr[others]) < 0.04)


def test_classification_is_balanced():
    ds = make_classification(n=101, p=10, n_informative=3, n_classes=3, seed=1)
    counts = np.bincount(ds.y)
    assert counts.tolist() == [34, 34, 33]
    assert ds.task == Task.CLASSIFICATION


def test_classification_centroids_separate_classes():
    ds = make_classification(n=400, p=6, n_informative=2, n_classes=2, class_sep=3.0, seed=2)
    informative = list(ds.informative)
    means = np.array([ds.X[ds.y == c][:, informative].mean(axis=0) for c in (0, 1)])
    assert np.linalg.norm(means[0] - means[1]) > 3.0


@pytest.mark.parametrize('kwargs', [
    dict(n_informative=0),
    dict(n_informative=30, p=20),
    dict(n=3),
])
def test_invalid_shapes(kwargs):
    with pytest.raises(ValueError):
        make_regression(**kwargs)


def test_too_many_classes_for_informative_dims():
    with pytest.raises(ValueError, match="invalid shape"):
        make_classification(n=100, p=5, n_informative=1, n_classes=3)


def test_split_sizes_and_disjointness():
    ds = make_regression(n=100, p=5, n_informative=2, seed=0)
    split = split_and_standardize(ds, test_fraction=0.2, seed=1)
    assert split.X_test.shape == (20, 5)
    assert split.X_train.shape == (80, 5)
    assert set(split.train_index).isdisjoint(split.test_index)
    assert len(set(split.train_index) | set(split.test_index)) == 100


def test_split_standardizes_train_only():
    ds = make_regression(n=60, p=4, n_informative=2, seed=3)
    split = split_and_standardize(ds, seed=4)
    np.testing.assert_allclose(split.X_train.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(split.X_train.std(axis=0), 1.0, atol=1e-12)
    np.testing.assert_allclose(split.transform(ds.X[split.test_index]), split.X_test)


def test_split_keeps_constant_columns(caplog):
    ds = make_regression(n=40, p=3, n_informative=1, seed=0)
    X = ds.X.copy()
    X[:, 1] = 7.0
    constant = type(ds)(X, ds.y, ds.task, ds.feature_names, ds.seed)
    split = split_and_standardize(constant, seed=0)
    assert split.constant_features == (1,)
    np.testing.assert_array_equal(split.X_train[:, 1], 0.0)
    assert "Constant features" in caplog.text


def test_split_too_small():
    ds = make_regression(n=4, p=2, n_informative=1, seed=0)
    with pytest.raises(ValueError, match="too-small splits"):
        split_and_standardize(ds, test_fraction=0.1)


def test_to_frame_has_target_column():
    ds = make_regression(n=10, p=3, n_informative=1, seed=0)
    frame = ds.to_frame()
    assert list(frame.columns) == ['x0', 'x1', 'x2', 'target']
