"""
Rank comparison metrics
The Shreyan Distance (position-weighted similarity of two ranked lists)
and the baseline statistics it is compared against
"""
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.constants import ERROR_MESSAGES, MetricName
from src.ranking import Permutation, relabel
from src.utils import NumericAssertionError

# Relative slack allowed before d > d_max counts as a violation
_DMAX_TOLERANCE = 1e-12

PairWeigher = Callable[[np.ndarray, np.ndarray, int], np.ndarray]


@dataclass(frozen=True)
class MetricValue:
    """A named metric evaluation"""
    name: str
    value: float


def _check_pair(r: Permutation, r_star: Permutation) -> int:
    if len(r) != len(r_star):
        raise ValueError(ERROR_MESSAGES['INCOMPARABLE'])
    return len(r)


def _dmax_numerator(x: int) -> int:
    half = x // 2
    head = sum((x - n + 1) * (x - 2 * n + 1) for n in range(1, half + 1))
    tail = sum((x - n + 1) * half for n in range(half + 1, x + 1))
    return head + tail


def _difference_numerator(r: Permutation, r_star: Permutation) -> int:
    x = len(r)
    return sum(
        (x - n + 1) * abs(a - b)
        for n, (a, b) in enumerate(zip(r.values, r_star.values), start=1)
    )


def d_max(x: int) -> float:
    """
    Largest weighted difference attainable by two permutations of size x

    Args:
        x: Ranking length

    Returns:
        d_max(x); 0.0 for x = 1
    """
    if x < 1:
        raise ValueError(ERROR_MESSAGES['EMPTY_RANKING'])
    return _dmax_numerator(x) / (x * x)


def weighted_difference(r: Permutation, r_star: Permutation) -> float:
    """
    Position-weighted absolute difference d(r, r*)

    Position n carries weight (x - n + 1), so disagreements near the top of
    the ranking cost more.

    Args:
        r: First permutation
        r_star: Second permutation, same length

    Returns:
        d(r, r*)
    """
    x = _check_pair(r, r_star)
    return _difference_numerator(r, r_star) / (x * x)


def shreyan_similarity(r: Permutation, r_star: Permutation) -> float:
    """
    Shreyan Distance d_s = 1 - d / d_max

    Despite the name this is a similarity: 1 means identical rankings.
    A single feature always agrees, so x = 1 returns 1.0. A pair whose
    reference is not the identity is relabeled first; d_max bounds d only
    for canonical pairs.

    Args:
        r: Reference permutation (identity after canonicalization)
        r_star: Compared permutation

    Returns:
        d_s in [0, 1]

    Raises:
        ValueError: On a length mismatch
        NumericAssertionError: If d exceeds d_max
    """
    x = _check_pair(r, r_star)
    if x == 1:
        return 1.0
    if r != Permutation.identity(x):
        r, r_star = relabel(r, r_star)
    numerator = _difference_numerator(r, r_star)
    maximum = _dmax_numerator(x)
    # both numerators share the 1/x^2 factor, so the ratio stays exact
    value = 1.0 - numerator / maximum
    if value < -_DMAX_TOLERANCE or value > 1.0:
        raise NumericAssertionError(
            f"{ERROR_MESSAGES['D_EXCEEDS_DMAX']}: x={x}, d={numerator / (x * x)}, d_max={maximum / (x * x)}"
        )
    return min(max(value, 0.0), 1.0)


def spearman_distance(r: Permutation, r_star: Permutation) -> float:
    """Sum of squared positionwise differences"""
    _check_pair(r, r_star)
    return float(sum((a - b) ** 2 for a, b in zip(r.values, r_star.values)))


def _pairs(r: Permutation, r_star: Permutation) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = _check_pair(r, r_star)
    if x < 2:
        raise ValueError(ERROR_MESSAGES['UNDEFINED'])
    i, j = np.triu_indices(x, k=1)
    a = r.as_array()
    b = r_star.as_array()
    concordance = np.sign(a[i] - a[j]) * np.sign(b[i] - b[j])
    # 1-based positions
    return i + 1, j + 1, concordance.astype(float)


def kendall_tau(r: Permutation, r_star: Permutation) -> float:
    """(concordant - discordant) / C(x, 2) over all position pairs"""
    _, _, concordance = _pairs(r, r_star)
    return float(concordance.mean())


def additive_position_weights(i: np.ndarray, j: np.ndarray, x: int) -> np.ndarray:
    """Pair weight (x - i + 1) + (x - j + 1), mirroring the Shreyan position weights"""
    return (x - i + 1) + (x - j + 1)


def weighted_kendall_tau(
    r: Permutation,
    r_star: Permutation,
    weigher: Optional[PairWeigher] = None
) -> float:
    """
    Kendall's tau with per-pair weights

    Args:
        r: Reference permutation
        r_star: Compared permutation
        weigher: Maps (i, j, x) position arrays to pair weights; defaults to
            additive position weights

    Returns:
        Weighted concordance in [-1, 1]
    """
    i, j, concordance = _pairs(r, r_star)
    weights = (weigher or additive_position_weights)(i, j, len(r)).astype(float)
    return float(np.dot(weights, concordance) / weights.sum())


def pearson_similarity_normalized(r: Permutation, r_star: Permutation) -> float:
    """Pearson correlation of the two sequences mapped to [0, 1] as (rho + 1) / 2"""
    x = _check_pair(r, r_star)
    if x < 2:
        raise ValueError(ERROR_MESSAGES['UNDEFINED'])
    rho = np.corrcoef(r.as_array(), r_star.as_array())[0, 1]
    return float(np.clip((rho + 1.0) / 2.0, 0.0, 1.0))


METRICS: Dict[str, Callable[[Permutation, Permutation], float]] = {
    MetricName.SHREYAN: shreyan_similarity,
    MetricName.SPEARMAN_DISTANCE: spearman_distance,
    MetricName.KENDALL_TAU: kendall_tau,
    MetricName.WEIGHTED_KENDALL_TAU: weighted_kendall_tau,
    MetricName.PEARSON_NORMALIZED: pearson_similarity_normalized,
}


def resolve_metric(name: str) -> str:
    """Map a metric name or CLI alias to its canonical name"""
    canonical = MetricName.resolve(name)
    if canonical not in METRICS:
        raise ValueError(f"{ERROR_MESSAGES['UNKNOWN_METRIC']}: {name}")
    return canonical


def symmetric_similarity(metric: str, r: Permutation, r_star: Permutation) -> float:
    """
    Mean of a metric over both reference directions

    Args:
        metric: Metric name
        r: First permutation
        r_star: Second permutation

    Returns:
        0.5 * (metric with r as reference + metric with r* as reference)
    """
    fn = METRICS[resolve_metric(metric)]
    forward = fn(*relabel(r, r_star))
    backward = fn(*relabel(r_star, r))
    return 0.5 * (forward + backward)


def evaluate_metric(name: str, r: Permutation, r_star: Permutation, symmetric: bool = False) -> MetricValue:
    """
    Evaluate a metric by name

    Args:
        name: Metric name or alias
        r: Reference permutation
        r_star: Compared permutation
        symmetric: Average both reference directions

    Returns:
        MetricValue
    """
    canonical = resolve_metric(name)
    if symmetric:
        value = symmetric_similarity(canonical, r, r_star)
    else:
        value = METRICS[canonical](r, r_star)
    return MetricValue(canonical, float(value))
