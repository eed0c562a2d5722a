"""
Local-function-approximation explainers
"""
import numpy as np

from src.constants import ExplainerKind
from src.datasets import SplitDataset
from src.explainers.common import ExplainerConfig, explained_function
from src.explainers.kernel_shap import (
    exact_linear_shap,
    kernel_shap_explain,
    kernel_shap_values,
    shapley_kernel_weight,
)
from src.explainers.lime import lime_explain, lime_surrogate
from src.models import TrainedModel
from src.ranking import ImportanceRecord

_EXPLAINERS = {
    ExplainerKind.LIME: lime_explain,
    ExplainerKind.KERNEL_SHAP: kernel_shap_explain,
}


def explain(
    model: TrainedModel,
    split: SplitDataset,
    instance: np.ndarray,
    config: ExplainerConfig,
    instance_id: int = 0
) -> ImportanceRecord:
    """Dispatch to the explainer named by config.kind"""
    return _EXPLAINERS[config.kind](model, split, instance, config, instance_id)


__all__ = [
    'ExplainerConfig',
    'explain',
    'explained_function',
    'exact_linear_shap',
    'kernel_shap_explain',
    'kernel_shap_values',
    'shapley_kernel_weight',
    'lime_explain',
    'lime_surrogate',
]
