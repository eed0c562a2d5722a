"""
Built-in models behind a uniform trainer contract
fit() turns a SplitDataset into an immutable TrainedModel; the explainers
only need predict / predict_proba query access
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np
from scipy import linalg, special
from scipy.spatial.distance import cdist

from src.config import (
    KNN_NEIGHBORS,
    LOGISTIC_L2,
    LOGISTIC_MAX_ITER,
    LOGISTIC_TOL,
    NB_VARIANCE_FLOOR,
    OLS_FALLBACK_LAMBDA,
    RIDGE_LAMBDA,
)
from src.constants import ERROR_MESSAGES, ModelKind, Task
from src.datasets import SplitDataset
from src.utils import logger

# Relative pivot size below which the QR factor counts as rank deficient
_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """A fitted model; parameters are read-only after fit"""
    kind: str
    task: str
    n_features: int
    params: Mapping[str, Any] = field(repr=False)
    classes: Tuple[int, ...] = ()
    warnings: Tuple[str, ...] = ()

    @property
    def is_classifier(self) -> bool:
        return self.task == Task.CLASSIFICATION

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"{ERROR_MESSAGES['DIMENSION_MISMATCH']}: expected {self.n_features} columns, got {X.shape[-1]}")
        return X

    def predict(self, X: np.ndarray) -> np.ndarray:
        """
        Predict targets (regression) or labels (classification)

        Args:
            X: Rows in standardized feature space

        Returns:
            One prediction per row
        """
        X = self._check(X)
        if self.is_classifier:
            proba = self.predict_proba(X)
            return np.asarray(self.classes)[np.argmax(proba, axis=1)]
        return _REGRESSORS[self.kind](self, X)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """
        Class probabilities, columns ordered as `classes`

        Args:
            X: Rows in standardized feature space

        Returns:
            n x K matrix whose rows sum to 1
        """
        if not self.is_classifier:
            raise ValueError(f"{self.kind} regression model has no predict_proba")
        X = self._check(X)
        return _CLASSIFIERS[self.kind](self, X)


def _design(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X])


def _ridge_coefficients(X: np.ndarray, y: np.ndarray, lam: float) -> Tuple[float, np.ndarray]:
    # intercept is not penalized
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    gram = Xc.T @ Xc + lam * np.eye(X.shape[1])
    coef = linalg.solve(gram, Xc.T @ (y - y_mean), assume_a='pos')
    return float(y_mean - x_mean @ coef), coef


# Regression fitters

def _fit_dummy_regression(split: SplitDataset, hyper: Mapping[str, Any]):
    return {'constant': float(split.y_train.mean())}, ()


def _fit_ols(split: SplitDataset, hyper: Mapping[str, Any]):
    A = _design(split.X_train)
    Q, R = np.linalg.qr(A)
    pivots = np.abs(np.diag(R))
    if pivots.min() <= _RANK_TOL * pivots.max():
        message = f"singular normal equations; ridge fallback with lambda={OLS_FALLBACK_LAMBDA}"
        logger.warning(f"OLS: {message}")
        intercept, coef = _ridge_coefficients(split.X_train, split.y_train, OLS_FALLBACK_LAMBDA)
        return {'intercept': intercept, 'coef': coef}, (message,)
    beta = linalg.solve_triangular(R, Q.T @ split.y_train)
    return {'intercept': float(beta[0]), 'coef': beta[1:]}, ()


def _fit_ridge(split: SplitDataset, hyper: Mapping[str, Any]):
    lam = float(hyper.get('lambda', RIDGE_LAMBDA))
    if lam < 0:
        raise ValueError(f"ridge lambda must be non-negative, got {lam}")
    intercept, coef = _ridge_coefficients(split.X_train, split.y_train, lam)
    return {'intercept': intercept, 'coef': coef, 'lambda': lam}, ()


def _fit_knn(split: SplitDataset, hyper: Mapping[str, Any]):
    k = int(hyper.get('k', KNN_NEIGHBORS))
    if k < 1:
        raise ValueError(f"knn needs k >= 1, got {k}")
    k = min(k, split.X_train.shape[0])
    return {'k': k, 'X': split.X_train.copy(), 'y': split.y_train.copy()}, ()


def _predict_linear(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    return model.params['intercept'] + X @ model.params['coef']


def _neighbors(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    distances = cdist(X, model.params['X'])
    # stable sort: equidistant neighbors resolve by train index
    return np.argsort(distances, axis=1, kind='stable')[:, :model.params['k']]


def _predict_knn_regression(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    return model.params['y'][_neighbors(model, X)].mean(axis=1)


# Classification fitters

def _class_index(split: SplitDataset) -> Tuple[np.ndarray, np.ndarray]:
    classes, index = np.unique(split.y_train, return_inverse=True)
    if classes.size < 2:
        raise ValueError("classification training split holds a single class")
    return classes, index


def _fit_dummy_classification(split: SplitDataset, hyper: Mapping[str, Any]):
    classes, index = _class_index(split)
    prior = np.bincount(index, minlength=classes.size) / index.size
    return {'prior': prior}, ()


def _logistic_objective(A: np.ndarray, Y: np.ndarray, B: np.ndarray, l2: float) -> float:
    logits = np.column_stack([np.zeros(A.shape[0]), A @ B])
    loglik = np.sum(Y * special.log_softmax(logits, axis=1))
    return float(loglik - 0.5 * l2 * np.sum(B[1:] ** 2))


def _fit_logistic(split: SplitDataset, hyper: Mapping[str, Any]):
    """
    Multinomial logistic regression by iteratively reweighted least squares

    Class 0 is the reference category; the binary case is K - 1 = 1.
    Newton steps are halved until the penalized log-likelihood improves.
    """
    l2 = float(hyper.get('l2', LOGISTIC_L2))
    max_iter = int(hyper.get('max_iter', LOGISTIC_MAX_ITER))
    tol = float(hyper.get('tol', LOGISTIC_TOL))

    classes, index = _class_index(split)
    A = _design(split.X_train)
    n, d = A.shape
    K = classes.size
    Y = np.eye(K)[index]
    B = np.zeros((d, K - 1))
    penalty = np.full(d, l2)
    penalty[0] = 0.0

    best = _logistic_objective(A, Y, B, l2)
    converged = False
    for iteration in range(1, max_iter + 1):
        logits = np.column_stack([np.zeros(n), A @ B])
        P = special.softmax(logits, axis=1)[:, 1:]
        gradient = A.T @ (Y[:, 1:] - P) - penalty[:, None] * B

        hessian = np.zeros((d * (K - 1), d * (K - 1)))
        for j in range(K - 1):
            for k in range(K - 1):
                w = P[:, j] * ((1.0 if j == k else 0.0) - P[:, k])
                hessian[j * d:(j + 1) * d, k * d:(k + 1) * d] = (A * w[:, None]).T @ A
        hessian += np.diag(np.tile(penalty, K - 1))

        try:
            step = linalg.solve(hessian, gradient.T.ravel(), assume_a='sym').reshape(K - 1, d).T
        except (linalg.LinAlgError, ValueError) as exc:
            logger.warning(f"IRLS stopped at iteration {iteration}: {exc}")
            break

        scale = 1.0
        improved = False
        while scale >= 1e-6:
            candidate = B + scale * step
            value = _logistic_objective(A, Y, candidate, l2)
            if np.isfinite(value) and value >= best:
                improved = True
                break
            scale *= 0.5
        if not improved:
            break

        change = np.max(np.abs(candidate - B))
        B, best = candidate, value
        if change < tol:
            converged = True
            break

    warnings = ()
    if not converged:
        message = f"IRLS did not converge in {max_iter} iterations; returning best iterate"
        logger.warning(message)
        warnings = (message,)
    return {'coef': B, 'converged': converged}, warnings


def _fit_gaussian_nb(split: SplitDataset, hyper: Mapping[str, Any]):
    floor = float(hyper.get('var_floor', NB_VARIANCE_FLOOR))
    classes, index = _class_index(split)
    X = split.X_train
    means = np.array([X[index == c].mean(axis=0) for c in range(classes.size)])
    variances = np.array([X[index == c].var(axis=0) for c in range(classes.size)])
    variances = np.maximum(variances, floor)
    prior = np.bincount(index, minlength=classes.size) / index.size
    return {'means': means, 'variances': variances, 'log_prior': np.log(prior)}, ()


def _proba_dummy(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    return np.tile(model.params['prior'], (X.shape[0], 1))


def _proba_logistic(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    logits = np.column_stack([np.zeros(X.shape[0]), _design(X) @ model.params['coef']])
    return special.softmax(logits, axis=1)


def _proba_knn(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    labels = np.searchsorted(model.classes, model.params['y'][_neighbors(model, X)])
    counts = np.apply_along_axis(np.bincount, 1, labels, minlength=len(model.classes))
    return counts / model.params['k']


def _proba_gaussian_nb(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    means = model.params['means']
    variances = model.params['variances']
    joint = model.params['log_prior'] - 0.5 * np.sum(np.log(2 * np.pi * variances), axis=1)
    joint = joint - 0.5 * np.sum((X[:, None, :] - means[None]) ** 2 / variances[None], axis=2)
    return special.softmax(joint, axis=1)


_REGRESSORS: Dict[str, Callable[[TrainedModel, np.ndarray], np.ndarray]] = {
    ModelKind.DUMMY: lambda model, X: np.full(X.shape[0], model.params['constant']),
    ModelKind.OLS: _predict_linear,
    ModelKind.RIDGE: _predict_linear,
    ModelKind.KNN: _predict_knn_regression,
}

_CLASSIFIERS: Dict[str, Callable[[TrainedModel, np.ndarray], np.ndarray]] = {
    ModelKind.DUMMY: _proba_dummy,
    ModelKind.LOGISTIC: _proba_logistic,
    ModelKind.KNN: _proba_knn,
    ModelKind.GAUSSIAN_NB: _proba_gaussian_nb,
}

_FITTERS = {
    Task.REGRESSION: {
        ModelKind.DUMMY: _fit_dummy_regression,
        ModelKind.OLS: _fit_ols,
        ModelKind.RIDGE: _fit_ridge,
        ModelKind.KNN: _fit_knn,
    },
    Task.CLASSIFICATION: {
        ModelKind.DUMMY: _fit_dummy_classification,
        ModelKind.LOGISTIC: _fit_logistic,
        ModelKind.KNN: _fit_knn,
        ModelKind.GAUSSIAN_NB: _fit_gaussian_nb,
    },
}


def fit(kind: str, split: SplitDataset, hyperparams: Optional[Mapping[str, Any]] = None) -> TrainedModel:
    """
    Train a built-in model on the standardized train partition

    Args:
        kind: One of ModelKind compatible with split.task
        split: Training data
        hyperparams: Optional overrides (lambda, k, l2, max_iter, tol, var_floor)

    Returns:
        TrainedModel

    Raises:
        ValueError: If the kind does not support the task
    """
    fitters = _FITTERS[split.task]
    if kind not in fitters:
        raise ValueError(f"{ERROR_MESSAGES['INCOMPATIBLE_KIND']}: {kind} / {split.task}")
    params, warnings = fitters[kind](split, dict(hyperparams or {}))
    classes = ()
    if split.task == Task.CLASSIFICATION:
        classes = tuple(int(c) for c in np.unique(split.y_train))
    logger.debug(f"Fitted {kind} {split.task} model on {split.X_train.shape[0]} rows")
    return TrainedModel(kind=kind, task=split.task, n_features=split.n_features,
                        params=params, classes=classes, warnings=tuple(warnings))
