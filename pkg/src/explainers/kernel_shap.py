"""
KernelSHAP-style Shapley value estimator
Samples coalitions from the Shapley kernel, evaluates the model on
instance/background mixtures and solves the efficiency-constrained
weighted least squares problem
"""
import itertools
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import comb

from src.config import SHAP_EXHAUSTIVE_MAX_FEATURES, SHAP_JITTER
from src.constants import ERROR_MESSAGES, BackgroundKind, ExplainerKind
from src.datasets import SplitDataset
from src.explainers.common import (
    ExplainerConfig,
    ModelFunction,
    check_instance,
    explained_function,
    explainer_rng,
)
from src.models import TrainedModel
from src.ranking import ImportanceRecord
from src.utils import logger


@dataclass(frozen=True, eq=False)
class Coalition:
    """Feature mask (1 = instance value, 0 = background value) and its regression weight"""
    mask: np.ndarray
    weight: float


@dataclass(frozen=True, eq=False)
class ShapleyEstimate:
    """Attributions plus the quantities the efficiency constraint ties together"""
    phi: np.ndarray
    base_value: float
    prediction: float


def shapley_kernel_weight(p: int, s: int) -> float:
    """
    Shapley kernel weight (p - 1) / (C(p, s) * s * (p - s))

    Args:
        p: Number of features
        s: Coalition size, 1..p-1

    Raises:
        ValueError: For the empty and full coalitions, which enter as constraints
    """
    if s in (0, p):
        raise ValueError(f"{ERROR_MESSAGES['CONSTRAINT_COALITION']}: s={s}, p={p}")
    if not 0 < s < p:
        raise ValueError(f"Coalition size {s} out of range for p={p}")
    return (p - 1) / (comb(p, s, exact=True) * s * (p - s))


def exact_linear_shap(w: Sequence[float], mu: Sequence[float], x: Sequence[float]) -> np.ndarray:
    """Closed-form Shapley values of a linear model: phi_i = w_i * (x_i - mu_i)"""
    w, mu, x = (np.asarray(v, dtype=float).ravel() for v in (w, mu, x))
    if not (w.size == mu.size == x.size):
        raise ValueError(ERROR_MESSAGES['LENGTH_MISMATCH'])
    return w * (x - mu)


def background_rows(split: SplitDataset, config: ExplainerConfig, rng: np.random.Generator) -> np.ndarray:
    """Reference rows the masked-out features are drawn from"""
    if config.background == BackgroundKind.TRAIN_MEAN:
        return split.X_train.mean(axis=0, keepdims=True)
    k = min(config.background_rows, split.X_train.shape[0])
    chosen = np.sort(rng.choice(split.X_train.shape[0], size=k, replace=False))
    return split.X_train[chosen]


def coalition_values(f: ModelFunction, instance: np.ndarray, background: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """
    Value of each coalition: model output averaged over background rows

    Args:
        f: Explained function
        instance: Explained row
        background: m x p reference rows
        masks: c x p 0/1 matrix

    Returns:
        c coalition values
    """
    masks = np.asarray(masks, dtype=bool)
    m = background.shape[0]
    mixed = np.where(masks[:, None, :], instance[None, None, :], background[None, :, :])
    outputs = f(mixed.reshape(-1, instance.size))
    return outputs.reshape(masks.shape[0], m).mean(axis=1)


def sample_coalitions(p: int, n_samples: int, rng: np.random.Generator) -> List[Coalition]:
    """
    Draw coalitions with probability proportional to their kernel weight

    Sizes 1..p-1 are drawn with mass C(p, s) * kernel(p, s); members are
    uniform within a size. Each draw carries weight 1 / n_samples since the
    kernel is already in the sampling distribution.
    """
    sizes = np.arange(1, p)
    mass = np.array([comb(p, s, exact=True) * shapley_kernel_weight(p, s) for s in sizes])
    drawn = rng.choice(sizes, size=n_samples, p=mass / mass.sum())
    coalitions = []
    for s in drawn:
        mask = np.zeros(p, dtype=np.int8)
        mask[rng.choice(p, size=int(s), replace=False)] = 1
        coalitions.append(Coalition(mask, 1.0 / n_samples))
    return coalitions


def enumerate_coalitions(p: int) -> List[Coalition]:
    """Every non-trivial coalition with its exact kernel weight"""
    coalitions = []
    for s in range(1, p):
        weight = shapley_kernel_weight(p, s)
        for members in itertools.combinations(range(p), s):
            mask = np.zeros(p, dtype=np.int8)
            mask[list(members)] = 1
            coalitions.append(Coalition(mask, weight))
    return coalitions


def solve_constrained(masks: np.ndarray, values: np.ndarray, weights: np.ndarray, base: float, full: float) -> np.ndarray:
    """
    Weighted least squares for phi subject to sum(phi) = full - base

    The last coefficient is eliminated through the constraint, which
    therefore holds exactly.
    """
    p = masks.shape[1]
    total = full - base
    if p == 1:
        return np.array([total])
    Z = masks.astype(float)
    design = Z[:, :-1] - Z[:, -1:]
    target = values - base - Z[:, -1] * total

    gram = (design * weights[:, None]).T @ design
    rhs = (design * weights[:, None]).T @ target
    if np.linalg.matrix_rank(gram) < p - 1:
        logger.warning(f"Rank-deficient coalition design; adding {SHAP_JITTER} to the diagonal")
        gram = gram + SHAP_JITTER * np.eye(p - 1)
    head = linalg.solve(gram, rhs, assume_a='sym')
    return np.append(head, total - head.sum())


def kernel_shap_values(
    model: TrainedModel,
    split: SplitDataset,
    instance: np.ndarray,
    config: ExplainerConfig,
    instance_id: int = 0
) -> ShapleyEstimate:
    """
    Estimate Shapley values for one instance

    Args:
        model: Model under explanation
        split: Training data (background source)
        instance: Row in standardized space
        config: KernelSHAP settings; exhaustive=True enumerates all coalitions
            (p <= 10 only)
        instance_id: Id used for seeding

    Returns:
        ShapleyEstimate with sum(phi) = f(instance) - f(background)
    """
    instance = check_instance(model, instance)
    p = instance.size
    rng = explainer_rng(config, instance_id)
    background = background_rows(split, config, rng)
    f = explained_function(model, instance)

    base = float(f(background).mean())
    prediction = float(f(instance.reshape(1, -1))[0])

    if config.exhaustive:
        if p > SHAP_EXHAUSTIVE_MAX_FEATURES:
            raise ValueError(f"Exhaustive enumeration supports p <= {SHAP_EXHAUSTIVE_MAX_FEATURES}, got {p}")
        coalitions = enumerate_coalitions(p)
    elif p > 1:
        coalitions = sample_coalitions(p, config.n_samples, rng)
    else:
        coalitions = []

    if not coalitions:
        return ShapleyEstimate(np.array([prediction - base]), base, prediction)

    masks = np.array([c.mask for c in coalitions])
    weights = np.array([c.weight for c in coalitions])
    values = coalition_values(f, instance, background, masks)

    if np.ptp(np.append(values, [base, prediction])) == 0:
        # constant response: every attribution is zero
        return ShapleyEstimate(np.zeros(p), base, prediction)

    phi = solve_constrained(masks, values, weights, base, prediction)
    return ShapleyEstimate(phi, base, prediction)


def kernel_shap_explain(
    model: TrainedModel,
    split: SplitDataset,
    instance: np.ndarray,
    config: ExplainerConfig,
    instance_id: int = 0
) -> ImportanceRecord:
    """
    Explain one instance with KernelSHAP attributions

    Args:
        model: Model under explanation
        split: Training data
        instance: Row in standardized space
        config: KernelSHAP settings
        instance_id: Id stored in the record and used for seeding

    Returns:
        ImportanceRecord of Shapley value estimates
    """
    estimate = kernel_shap_values(model, split, instance, config, instance_id)
    logger.debug(
        f"KernelSHAP instance {instance_id}: f(x)={estimate.prediction:.6g}, "
        f"f(b)={estimate.base_value:.6g}"
    )
    return ImportanceRecord.from_values(ExplainerKind.KERNEL_SHAP, instance_id, estimate.phi, split.feature_names)
