"""
LIME-style local surrogate explainer
Perturbs the instance with Gaussian noise, weights samples by an
exponential kernel and reads importances off a weighted ridge fit
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from src.constants import ERROR_MESSAGES, ExplainerKind
from src.datasets import SplitDataset
from src.explainers.common import ExplainerConfig, check_instance, explained_function, explainer_rng
from src.models import TrainedModel
from src.ranking import ImportanceRecord
from src.utils import logger

# Total kernel weight below which the neighbourhood counts as empty
_MIN_WEIGHT_MASS = 1e-12


@dataclass(frozen=True, eq=False)
class SurrogateFit:
    """Weighted ridge surrogate around one instance"""
    coef: np.ndarray
    intercept: float
    r2: float
    kernel_width: float


def _weighted_ridge(Z: np.ndarray, y: np.ndarray, w: np.ndarray, alpha: float):
    total = w.sum()
    z_mean = w @ Z / total
    y_mean = w @ y / total
    Zc = Z - z_mean
    yc = y - y_mean
    gram = (Zc * w[:, None]).T @ Zc + alpha * np.eye(Z.shape[1])
    coef = linalg.solve(gram, (Zc * w[:, None]).T @ yc, assume_a='pos')
    intercept = float(y_mean - z_mean @ coef)

    residual = yc - Zc @ coef
    total_ss = float(w @ yc ** 2)
    r2 = 1.0 - float(w @ residual ** 2) / total_ss if total_ss > 0 else 1.0
    return coef, intercept, r2


def lime_surrogate(
    model: TrainedModel,
    split: SplitDataset,
    instance: np.ndarray,
    config: ExplainerConfig,
    instance_id: int = 0
) -> SurrogateFit:
    """
    Fit the local surrogate for one instance

    Args:
        model: Model under explanation
        split: Data the model was trained on (fixes p)
        instance: Row in standardized space
        config: LIME settings
        instance_id: Id used for seeding

    Returns:
        SurrogateFit with one coefficient per feature

    Raises:
        ValueError: If the kernel leaves no weight on the samples
    """
    instance = check_instance(model, instance)
    p = instance.size
    rng = explainer_rng(config, instance_id)
    width = config.width_for(p)

    noise = rng.standard_normal((config.n_samples, p))
    Z = instance + noise
    weights = np.exp(-np.sum(noise ** 2, axis=1) / width ** 2)
    if weights.sum() < _MIN_WEIGHT_MASS:
        raise ValueError(f"{ERROR_MESSAGES['KERNEL_WIDTH']}: width={width}")

    f = explained_function(model, instance)
    outputs = f(Z)
    if np.ptp(outputs) == 0:
        # constant response: nothing to attribute
        return SurrogateFit(np.zeros(p), float(outputs[0]), 1.0, width)

    coef, intercept, r2 = _weighted_ridge(Z, outputs, weights, config.ridge_strength)
    return SurrogateFit(coef, intercept, r2, width)


def lime_explain(
    model: TrainedModel,
    split: SplitDataset,
    instance: np.ndarray,
    config: ExplainerConfig,
    instance_id: int = 0
) -> ImportanceRecord:
    """
    Explain one instance with a local weighted ridge surrogate

    Args:
        model: Model under explanation
        split: Data the model was trained on
        instance: Row in standardized space
        config: LIME settings
        instance_id: Id stored in the record and used for seeding

    Returns:
        ImportanceRecord of signed surrogate coefficients for all p features
    """
    surrogate = lime_surrogate(model, split, instance, config, instance_id)
    logger.debug(f"LIME instance {instance_id}: surrogate R2={surrogate.r2:.4f}")
    return ImportanceRecord.from_values(ExplainerKind.LIME, instance_id, surrogate.coef, split.feature_names)
