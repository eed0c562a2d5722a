"""
Ranked feature lists
Turns raw importance scores into rankings and relabels explainer pairs
into the permutation form the rank metrics consume
"""
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.constants import ERROR_MESSAGES


@dataclass(frozen=True, order=True)
class FeatureId:
    """A dataset column, identified by its 0-based index"""
    index: int
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"Feature index must be non-negative, got {self.index}")

    @property
    def label(self) -> str:
        return self.name if self.name is not None else str(self.index)


@dataclass(frozen=True)
class ImportanceRecord:
    """Signed importance per feature produced by one explainer for one instance"""
    explainer_name: str
    instance_id: int
    scores: Mapping[FeatureId, float]

    @classmethod
    def from_values(
        cls,
        explainer_name: str,
        instance_id: int,
        values: Sequence[float],
        names: Optional[Sequence[str]] = None
    ) -> 'ImportanceRecord':
        """
        Build a record from a score vector in feature-index order

        Args:
            explainer_name: Producing explainer
            instance_id: Explained instance
            values: One score per feature
            names: Optional display names, same length as values

        Returns:
            ImportanceRecord
        """
        if names is not None and len(names) != len(values):
            raise ValueError(ERROR_MESSAGES['LENGTH_MISMATCH'])
        scores = {
            FeatureId(i, names[i] if names is not None else None): float(v)
            for i, v in enumerate(values)
        }
        return cls(explainer_name, int(instance_id), scores)

    @property
    def features(self) -> Tuple[FeatureId, ...]:
        return tuple(sorted(self.scores))

    def values(self) -> np.ndarray:
        """Scores in ascending feature-index order"""
        return np.array([self.scores[f] for f in self.features], dtype=float)


@dataclass(frozen=True)
class RankedList:
    """Features ordered by descending importance; position 1 comes first"""
    items: Tuple[FeatureId, ...]

    def __post_init__(self):
        if not self.items:
            raise ValueError(ERROR_MESSAGES['NO_FEATURES'])
        indices = [f.index for f in self.items]
        if len(set(indices)) != len(indices):
            raise ValueError(f"Duplicate feature in ranking: {indices}")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def indices(self) -> Tuple[int, ...]:
        return tuple(f.index for f in self.items)


@dataclass(frozen=True)
class Permutation:
    """A bijection on {1..x}, stored as the sequence of its values"""
    values: Tuple[int, ...]

    def __post_init__(self):
        x = len(self.values)
        if x == 0:
            raise ValueError(ERROR_MESSAGES['EMPTY_RANKING'])
        if sorted(self.values) != list(range(1, x + 1)):
            raise ValueError(f"{ERROR_MESSAGES['NOT_PERMUTATION']}: {list(self.values)}")

    @classmethod
    def of(cls, values: Iterable[int]) -> 'Permutation':
        return cls(tuple(int(v) for v in values))

    @classmethod
    def identity(cls, x: int) -> 'Permutation':
        return cls(tuple(range(1, x + 1)))

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.int64)


def rank_features(record: ImportanceRecord, by_absolute: bool = True) -> RankedList:
    """
    Rank a record's features by descending importance

    Ties are broken by ascending feature index so rankings are reproducible
    even when every score is zero.

    Args:
        record: Importance scores for one instance
        by_absolute: Rank by |score| (default) instead of the signed score

    Returns:
        RankedList, most important feature first

    Raises:
        ValueError: On an empty record or a non-finite score
    """
    if not record.scores:
        raise ValueError(ERROR_MESSAGES['NO_FEATURES'])
    for feature, score in record.scores.items():
        if not math.isfinite(score):
            raise ValueError(f"{ERROR_MESSAGES['INVALID_IMPORTANCE']}: {feature.label}={score}")

    def key(item):
        feature, score = item
        magnitude = abs(score) if by_absolute else score
        return (-magnitude, feature.index)

    ordered = sorted(record.scores.items(), key=key)
    return RankedList(tuple(feature for feature, _ in ordered))


def canonicalize_pair(reference: RankedList, other: RankedList) -> Tuple[Permutation, Permutation]:
    """
    Relabel both rankings by feature rank under the reference

    Args:
        reference: Ranking whose order defines labels 1..x
        other: Ranking rewritten in those labels

    Returns:
        (identity permutation, other expressed in reference labels)

    Raises:
        ValueError: If the rankings cover different feature sets
    """
    if len(reference) != len(other) or set(reference.indices) != set(other.indices):
        raise ValueError(ERROR_MESSAGES['INCOMPARABLE'])
    labels: Dict[int, int] = {index: rank for rank, index in enumerate(reference.indices, start=1)}
    relabeled = Permutation(tuple(labels[index] for index in other.indices))
    return Permutation.identity(len(reference)), relabeled


def invert(p: Permutation) -> Permutation:
    """Inverse permutation q with q[p[i]] = i (1-based)"""
    inverse = [0] * len(p)
    for position, value in enumerate(p.values, start=1):
        inverse[value - 1] = position
    return Permutation(tuple(inverse))


def relabel(reference: Permutation, other: Permutation) -> Tuple[Permutation, Permutation]:
    """
    Re-express a permutation pair with `reference` as the identity

    Args:
        reference: Permutation whose order becomes 1..x
        other: Permutation to rewrite

    Returns:
        (identity, other in reference labels)
    """
    if len(reference) != len(other):
        raise ValueError(ERROR_MESSAGES['INCOMPARABLE'])
    position = invert(reference).values
    return Permutation.identity(len(reference)), Permutation(tuple(position[v - 1] for v in other.values))
