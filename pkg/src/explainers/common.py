"""
Shared explainer configuration and query plumbing
"""
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from src.config import (
    LIME_KERNEL_SCALE,
    LIME_RIDGE,
    LIME_SAMPLES,
    MIN_EXPLAINER_SAMPLES,
    SHAP_BACKGROUND_ROWS,
    SHAP_SAMPLES,
)
from src.constants import ERROR_MESSAGES, BackgroundKind, ExplainerKind
from src.models import TrainedModel
from src.utils import Seed, derive_seed, make_rng, seed_tuple

ModelFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ExplainerConfig:
    """
    Settings for one explainer

    kernel_width None means 0.75 * sqrt(p) at explanation time. Feature
    selection is always "none": every feature receives a score.
    """
    kind: str
    n_samples: int
    kernel_width: Optional[float] = None
    ridge_strength: float = LIME_RIDGE
    background: str = BackgroundKind.TRAIN_MEAN
    background_rows: int = SHAP_BACKGROUND_ROWS
    exhaustive: bool = False
    seed: Seed = 0

    def __post_init__(self):
        if self.kind not in ExplainerKind.ALL:
            raise ValueError(f"{ERROR_MESSAGES['UNKNOWN_EXPLAINER']}: {self.kind}")
        if self.n_samples < MIN_EXPLAINER_SAMPLES:
            raise ValueError(f"n_samples must be >= {MIN_EXPLAINER_SAMPLES}, got {self.n_samples}")
        if self.kernel_width is not None and not self.kernel_width > 0:
            raise ValueError(f"kernel_width must be positive, got {self.kernel_width}")
        if self.ridge_strength < 0:
            raise ValueError(f"ridge_strength must be non-negative, got {self.ridge_strength}")
        if self.background not in (BackgroundKind.TRAIN_MEAN, BackgroundKind.K_ROWS):
            raise ValueError(f"Unknown background: {self.background}")
        if self.background_rows < 1:
            raise ValueError(f"background_rows must be >= 1, got {self.background_rows}")
        object.__setattr__(self, 'seed', seed_tuple(self.seed))

    @classmethod
    def default(cls, kind: str, **overrides) -> 'ExplainerConfig':
        """Defaults per kind: LIME 1000 samples, KernelSHAP 2048"""
        kind = ExplainerKind.resolve(kind)
        n_samples = LIME_SAMPLES if kind == ExplainerKind.LIME else SHAP_SAMPLES
        return cls(kind=kind, n_samples=overrides.pop('n_samples', n_samples), **overrides)

    def with_seed(self, seed: Seed) -> 'ExplainerConfig':
        return replace(self, seed=seed)

    def width_for(self, p: int) -> float:
        if self.kernel_width is not None:
            return float(self.kernel_width)
        return LIME_KERNEL_SCALE * math.sqrt(p)


def explainer_rng(config: ExplainerConfig, instance_id: int) -> np.random.Generator:
    """Generator seeded by (config seed, instance id, explainer kind)"""
    return make_rng(derive_seed(config.seed, instance_id, ExplainerKind.index(config.kind)))


def explained_function(model: TrainedModel, instance: np.ndarray) -> ModelFunction:
    """
    The scalar function an explanation decomposes

    Regression models explain their prediction; classifiers explain the
    probability of the class they predict at the explained instance.

    Args:
        model: Trained model
        instance: Explained row (standardized space)

    Returns:
        Callable mapping an n x p matrix to n outputs
    """
    if not model.is_classifier:
        return model.predict
    predicted = int(model.predict(instance.reshape(1, -1))[0])
    column = model.classes.index(predicted)
    return lambda X: model.predict_proba(X)[:, column]


def check_instance(model: TrainedModel, instance: np.ndarray) -> np.ndarray:
    instance = np.asarray(instance, dtype=float).ravel()
    if instance.size != model.n_features:
        raise ValueError(f"{ERROR_MESSAGES['DIMENSION_MISMATCH']}: instance has {instance.size} features")
    if not np.all(np.isfinite(instance)):
        raise ValueError("instance contains non-finite values")
    return instance
