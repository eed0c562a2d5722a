"""
Shared fixtures for the test suite
"""
import os

# Keep test runs from writing rankcheck.log; must be set before src is imported
os.environ['RANKCHECK_LOG_FILE'] = ''

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from src.constants import ModelKind, Task  # noqa: E402
from src.datasets import make_classification, make_regression, split_and_standardize  # noqa: E402
from src.models import TrainedModel, fit  # noqa: E402

LINEAR_COEF = np.array([8.0, -6.0, 4.0, 2.0, -1.0, 0.5])
LINEAR_INTERCEPT = 3.0


@pytest.fixture
def regression_split():
    """Noiseless 6-feature regression split"""
    ds = make_regression(n=100, p=6, n_informative=3, noise_sd=0.0, seed=1)
    return split_and_standardize(ds, test_fraction=0.2, seed=2)


@pytest.fixture
def classification_split():
    """Well separated 5-feature binary classification split"""
    ds = make_classification(n=120, p=5, n_informative=2, n_classes=2, class_sep=2.0, seed=3)
    return split_and_standardize(ds, test_fraction=0.25, seed=4)


@pytest.fixture
def linear_model():
    """Hand-built linear regressor with well separated coefficients"""
    return TrainedModel(
        kind=ModelKind.OLS,
        task=Task.REGRESSION,
        n_features=LINEAR_COEF.size,
        params={'intercept': LINEAR_INTERCEPT, 'coef': LINEAR_COEF},
    )


@pytest.fixture
def fitted_logistic(classification_split):
    return fit(ModelKind.LOGISTIC, classification_split)
