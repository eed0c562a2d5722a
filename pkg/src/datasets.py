"""
Synthetic tabular datasets
Seeded regression and classification generators plus the train/test
split with train-only standardization
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from src.config import (
    DEFAULT_CLASS_SEP,
    DEFAULT_N_CLASSES,
    DEFAULT_N_FEATURES,
    DEFAULT_N_INFORMATIVE,
    DEFAULT_N_ROWS,
    DEFAULT_NOISE_SD,
    DEFAULT_TEST_FRACTION,
    MAX_INFORMATIVE_WEIGHT,
)
from src.constants import ERROR_MESSAGES, Task
from src.utils import Seed, logger, make_rng, seed_tuple, validate_fraction, validate_positive_int


@dataclass(frozen=True, eq=False)
class Dataset:
    """A generated table; y holds reals for regression, labels 0..K-1 for classification"""
    X: np.ndarray
    y: np.ndarray
    task: str
    feature_names: Tuple[str, ...]
    seed: Tuple[int, ...]
    informative: Tuple[int, ...] = ()
    coef: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        n, p = self.X.shape
        if n < 4 or p < 1:
            raise ValueError(f"{ERROR_MESSAGES['INVALID_SHAPE']}: dataset is {n}x{p}")
        if self.y.shape != (n,):
            raise ValueError(ERROR_MESSAGES['DIMENSION_MISMATCH'])
        if len(self.feature_names) != p:
            raise ValueError(ERROR_MESSAGES['DIMENSION_MISMATCH'])
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.y))):
            raise ValueError("dataset contains non-finite values")
        if self.task not in Task.ALL:
            raise ValueError(f"Unknown task: {self.task}")
        if self.task == Task.CLASSIFICATION and np.unique(self.y).size < 2:
            raise ValueError("classification dataset needs at least two labels")

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def to_frame(self) -> pd.DataFrame:
        """Feature columns followed by a target column"""
        frame = pd.DataFrame(self.X, columns=list(self.feature_names))
        frame['target'] = self.y
        return frame

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)


@dataclass(frozen=True, eq=False)
class SplitDataset:
    """Train/test partition in standardized feature space"""
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    constant_features: Tuple[int, ...]
    task: str
    feature_names: Tuple[str, ...]
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)

    @property
    def n_features(self) -> int:
        return self.X_train.shape[1]

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Standardize raw rows with the train parameters"""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise ValueError(ERROR_MESSAGES['DIMENSION_MISMATCH'])
        return (X - self.mean) / self.scale


def feature_names(p: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(p))


def _check_shape(n: int, p: int, n_informative: int) -> None:
    validate_positive_int(n, 'n', minimum=4)
    validate_positive_int(p, 'p')
    validate_positive_int(n_informative, 'n_informative')
    if n_informative > p:
        raise ValueError(f"{ERROR_MESSAGES['INVALID_SHAPE']}: n_informative={n_informative} > p={p}")


def make_regression(
    n: int = DEFAULT_N_ROWS,
    p: int = DEFAULT_N_FEATURES,
    n_informative: int = DEFAULT_N_INFORMATIVE,
    noise_sd: float = DEFAULT_NOISE_SD,
    seed: Seed = 0
) -> Dataset:
    """
    Linear regression data with a sparse weight vector

    X has standard normal entries; n_informative weights drawn uniform(0, 100)
    sit at seeded random positions; y = Xw + noise_sd * N(0, 1).

    Args:
        n: Rows (>= 4)
        p: Features
        n_informative: Nonzero weights (1..p)
        noise_sd: Noise standard deviation
        seed: Seed

    Returns:
        Dataset with the true weights in `coef`
    """
    _check_shape(n, p, n_informative)
    if noise_sd < 0:
        raise ValueError(f"{ERROR_MESSAGES['INVALID_SHAPE']}: noise_sd={noise_sd}")

    rng = make_rng(seed)
    X = rng.standard_normal((n, p))
    informative = np.sort(rng.choice(p, size=n_informative, replace=False))
    w = np.zeros(p)
    w[informative] = rng.uniform(0.0, MAX_INFORMATIVE_WEIGHT, size=n_informative)
    y = X @ w + noise_sd * rng.standard_normal(n)

    logger.debug(f"Generated regression dataset {n}x{p}, informative={informative.tolist()}")
    return Dataset(X, y, Task.REGRESSION, feature_names(p), seed_tuple(seed),
                   tuple(int(i) for i in informative), w)


def _hypercube_vertices(rng: np.random.Generator, n_classes: int, dims: int, class_sep: float) -> np.ndarray:
    if dims < 63 and n_classes > 2 ** dims:
        raise ValueError(f"{ERROR_MESSAGES['INVALID_SHAPE']}: {n_classes} classes need more than {dims} informative features")
    chosen = []
    seen = set()
    while len(chosen) < n_classes:
        signs = rng.integers(0, 2, size=dims)
        key = tuple(signs.tolist())
        if key in seen:
            continue
        seen.add(key)
        chosen.append(np.where(signs == 1, class_sep, -class_sep))
    return np.array(chosen, dtype=float)


def make_classification(
    n: int = DEFAULT_N_ROWS,
    p: int = DEFAULT_N_FEATURES,
    n_informative: int = DEFAULT_N_INFORMATIVE,
    n_classes: int = DEFAULT_N_CLASSES,
    class_sep: float = DEFAULT_CLASS_SEP,
    seed: Seed = 0
) -> Dataset:
    """
    Gaussian clusters on hypercube vertices

    Each class gets a distinct seeded vertex of the +/-class_sep hypercube in
    the informative subspace; samples are centroid + N(0, I). The remaining
    dimensions are pure noise. Class counts are balanced with the remainder
    going to the lowest labels, and rows are shuffled.

    Args:
        n: Rows (>= 2 * n_classes)
        p: Features
        n_informative: Informative features (1..p)
        n_classes: Number of classes (>= 2)
        class_sep: Half the distance between adjacent vertices
        seed: Seed

    Returns:
        Dataset
    """
    _check_shape(n, p, n_informative)
    validate_positive_int(n_classes, 'n_classes', minimum=2)
    if n < 2 * n_classes:
        raise ValueError(f"{ERROR_MESSAGES['INVALID_SHAPE']}: n={n} < 2 * n_classes")
    if class_sep < 0:
        raise ValueError(f"{ERROR_MESSAGES['INVALID_SHAPE']}: class_sep={class_sep}")

    rng = make_rng(seed)
    informative = np.sort(rng.choice(p, size=n_informative, replace=False))
    centroids = _hypercube_vertices(rng, n_classes, n_informative, class_sep)

    base, extra = divmod(n, n_classes)
    counts = [base + (1 if label < extra else 0) for label in range(n_classes)]
    y = np.repeat(np.arange(n_classes), counts)

    X = rng.standard_normal((n, p))
    X[:, informative] += centroids[y]

    order = rng.permutation(n)
    logger.debug(f"Generated classification dataset {n}x{p}, classes={n_classes}, sep={class_sep}")
    return Dataset(X[order], y[order], Task.CLASSIFICATION, feature_names(p), seed_tuple(seed),
                   tuple(int(i) for i in informative))


def split_and_standardize(
    ds: Dataset,
    test_fraction: float = DEFAULT_TEST_FRACTION,
    seed: Seed = 0
) -> SplitDataset:
    """
    Seeded shuffle split with train-only standardization

    Constant train columns are centered and keep a scale of 1.

    Args:
        ds: Dataset to split
        test_fraction: Share of rows held out, in (0, 1)
        seed: Seed for the shuffle

    Returns:
        SplitDataset

    Raises:
        ValueError: If either side ends up too small
    """
    validate_fraction(test_fraction, 'test_fraction')
    n = ds.n_rows
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n - n_test < 2:
        raise ValueError(f"{ERROR_MESSAGES['SPLIT_TOO_SMALL']}: n={n}, test_fraction={test_fraction}")

    order = make_rng(seed).permutation(n)
    test_index = np.sort(order[:n_test])
    train_index = np.sort(order[n_test:])

    X_train = ds.X[train_index]
    mean = X_train.mean(axis=0)
    sd = X_train.std(axis=0)
    constant = tuple(int(i) for i in np.flatnonzero(sd == 0))
    scale = np.where(sd == 0, 1.0, sd)
    if constant:
        logger.warning(f"Constant features left unscaled: {constant}")

    return SplitDataset(
        X_train=(X_train - mean) / scale,
        y_train=ds.y[train_index],
        X_test=(ds.X[test_index] - mean) / scale,
        y_test=ds.y[test_index],
        mean=mean,
        scale=scale,
        constant_features=constant,
        task=ds.task,
        feature_names=ds.feature_names,
        train_index=train_index,
        test_index=test_index,
    )
