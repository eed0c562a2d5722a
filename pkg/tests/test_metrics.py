import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.metrics import (
    METRICS,
    additive_position_weights,
    d_max,
    evaluate_metric,
    kendall_tau,
    pearson_similarity_normalized,
    resolve_metric,
    shreyan_similarity,
    spearman_distance,
    symmetric_similarity,
    weighted_difference,
    weighted_kendall_tau,
)
from src.ranking import Permutation, relabel
from src.utils import NumericAssertionError

IDENTITY5 = Permutation((1, 2, 3, 4, 5))
REVERSED5 = Permutation((5, 4, 3, 2, 1))


def perm(*values):
    return Permutation(values)


def permutation_pairs(max_x=50):
    return st.integers(min_value=2, max_value=max_x).flatmap(
        lambda x: st.tuples(
            st.permutations(list(range(1, x + 1))),
            st.permutations(list(range(1, x + 1))),
        )
    )


@pytest.mark.parametrize('x, expected', [(5, 1.6), (3, 1.0), (2, 0.75), (1, 0.0)])
def test_d_max_values(x, expected):
    assert d_max(x) == pytest.approx(expected, abs=1e-12)


def test_d_max_rejects_empty():
    with pytest.raises(ValueError, match="empty ranking"):
        d_max(0)


def test_weighted_difference_worked_examples():
    assert weighted_difference(IDENTITY5, perm(2, 1, 3, 5, 4)) == pytest.approx(0.48, abs=1e-12)
    assert weighted_difference(IDENTITY5, REVERSED5) == pytest.approx(1.44, abs=1e-12)
    assert weighted_difference(REVERSED5, REVERSED5) == 0.0


def test_weighted_difference_length_mismatch():
    with pytest.raises(ValueError, match="incomparable rankings"):
        weighted_difference(IDENTITY5, perm(1, 2, 3))


@pytest.mark.parametrize('other, expected', [
    ((2, 1, 3, 5, 4), 0.7),
    ((1, 2, 3, 5, 4), 0.925),
    ((2, 1, 3, 4, 5), 0.775),
    ((5, 4, 3, 2, 1), 0.1),
    ((1, 2, 3, 4, 5), 1.0),
])
def test_shreyan_worked_examples(other, expected):
    assert shreyan_similarity(IDENTITY5, Permutation(other)) == pytest.approx(expected, abs=1e-12)


def test_shreyan_single_feature():
    assert shreyan_similarity(perm(1), perm(1)) == 1.0


def test_shreyan_is_asymmetric():
    identity = perm(1, 2, 3)
    cycle = perm(2, 3, 1)
    assert shreyan_similarity(identity, cycle) == pytest.approx(2 / 9, abs=1e-12)
    # with the 3-cycle as reference the other side becomes [3, 1, 2]
    assert relabel(cycle, identity)[1] == perm(3, 1, 2)
    assert shreyan_similarity(cycle, identity) == pytest.approx(0.0, abs=1e-12)


def test_raw_pairs_can_exceed_d_max_but_similarity_stays_bounded():
    r, r_star = perm(1, 3, 2), perm(3, 1, 2)
    assert weighted_difference(r, r_star) == pytest.approx(10 / 9)
    assert weighted_difference(r, r_star) > d_max(3)
    assert 0.0 <= shreyan_similarity(r, r_star) <= 1.0


def test_shreyan_raises_when_d_exceeds_d_max(monkeypatch):
    monkeypatch.setattr('src.metrics._dmax_numerator', lambda x: 1)
    with pytest.raises(NumericAssertionError, match="exceeds d_max"):
        shreyan_similarity(IDENTITY5, REVERSED5)


@pytest.mark.slow
@pytest.mark.parametrize('x', [2, 3, 4, 5, 6])
def test_d_max_is_the_exhaustive_maximum(x):
    perms = np.array(list(itertools.permutations(range(1, x + 1))))
    inverse = np.argsort(perms, axis=1) + 1
    # canonical form of every ordered pair (a, b): b relabeled by a's ranks
    canonical = inverse[:, perms - 1]
    weights = np.arange(x, 0, -1)
    d = (np.abs(canonical - np.arange(1, x + 1)) * weights).sum(axis=2) / (x * x)
    assert d.max() == pytest.approx(d_max(x), abs=1e-12)
    assert d.max() <= d_max(x) + 1e-12


@settings(max_examples=300)
@given(permutation_pairs())
def test_shreyan_within_unit_interval(pair):
    a, b = pair
    value = shreyan_similarity(Permutation(tuple(a)), Permutation(tuple(b)))
    assert 0.0 <= value <= 1.0


@pytest.mark.slow
def test_shreyan_unit_interval_bulk():
    rng = np.random.default_rng(7)
    for _ in range(100_000):
        x = int(rng.integers(2, 51))
        r = Permutation.of(rng.permutation(x) + 1)
        r_star = Permutation.of(rng.permutation(x) + 1)
        assert 0.0 <= shreyan_similarity(r, r_star) <= 1.0


@given(st.integers(min_value=1, max_value=30).flatmap(lambda x: st.permutations(list(range(1, x + 1)))))
def test_shreyan_self_similarity_is_exactly_one(values):
    p = Permutation(tuple(values))
    assert shreyan_similarity(p, p) == 1.0


def test_spearman_distance_examples():
    assert spearman_distance(IDENTITY5, perm(1, 2, 3, 5, 4)) == 2
    assert spearman_distance(IDENTITY5, perm(2, 1, 3, 4, 5)) == 2
    assert spearman_distance(IDENTITY5, IDENTITY5) == 0
    assert spearman_distance(perm(1, 2, 3), perm(3, 2, 1)) == 8


@given(permutation_pairs(20))
def test_spearman_distance_is_squared_euclidean_norm(pair):
    a, b = (np.array(v) for v in pair)
    expected = np.linalg.norm(a - b) ** 2
    assert spearman_distance(Permutation(tuple(pair[0])), Permutation(tuple(pair[1]))) == pytest.approx(expected)


def test_kendall_tau_examples():
    assert kendall_tau(IDENTITY5, REVERSED5) == -1.0
    assert kendall_tau(IDENTITY5, IDENTITY5) == 1.0
    assert kendall_tau(perm(1, 2, 3), perm(2, 1, 3)) == pytest.approx(1 / 3)


def test_kendall_tau_undefined_for_one_feature():
    with pytest.raises(ValueError, match="undefined"):
        kendall_tau(perm(1), perm(1))
    with pytest.raises(ValueError, match="undefined"):
        weighted_kendall_tau(perm(1), perm(1))
    with pytest.raises(ValueError, match="undefined"):
        pearson_similarity_normalized(perm(1), perm(1))


def test_weighted_kendall_tau_extremes():
    assert weighted_kendall_tau(IDENTITY5, REVERSED5) == -1.0
    assert weighted_kendall_tau(IDENTITY5, IDENTITY5) == 1.0


def test_weighted_kendall_tau_by_enumeration():
    r, r_star = perm(1, 2, 3), perm(2, 1, 3)
    x = 3
    numerator = denominator = 0.0
    for i in range(1, x + 1):
        for j in range(i + 1, x + 1):
            w = (x - i + 1) + (x - j + 1)
            concordant = (r.values[i - 1] - r.values[j - 1]) * (r_star.values[i - 1] - r_star.values[j - 1]) > 0
            numerator += w if concordant else -w
            denominator += w
    # pairs (1,2) w=5 discordant, (1,3) w=4 and (2,3) w=3 concordant
    assert numerator / denominator == pytest.approx(2 / 12)
    assert weighted_kendall_tau(r, r_star) == pytest.approx(numerator / denominator)


@given(permutation_pairs(15))
def test_weighted_kendall_with_equal_weights_is_kendall(pair):
    r, r_star = Permutation(tuple(pair[0])), Permutation(tuple(pair[1]))
    flat = weighted_kendall_tau(r, r_star, weigher=lambda i, j, x: np.ones_like(i))
    assert flat == pytest.approx(kendall_tau(r, r_star), abs=1e-12)


def test_additive_position_weights():
    i, j = np.array([1, 1, 2]), np.array([2, 3, 3])
    assert additive_position_weights(i, j, 3).tolist() == [5, 4, 3]


def test_pearson_normalized_examples():
    assert pearson_similarity_normalized(IDENTITY5, REVERSED5) == pytest.approx(0.0, abs=1e-12)
    assert pearson_similarity_normalized(IDENTITY5, IDENTITY5) == pytest.approx(1.0, abs=1e-12)
    # rho = 3/5 for two disjoint adjacent swaps
    assert pearson_similarity_normalized(perm(1, 2, 3, 4), perm(2, 1, 4, 3)) == pytest.approx(0.8)


@pytest.mark.parametrize('alias, canonical', [
    ('shreyan', 'shreyan'),
    ('spearman', 'spearman_distance'),
    ('kendall', 'kendall_tau'),
    ('wkendall', 'weighted_kendall_tau'),
    ('pearson', 'pearson_normalized'),
    ('Kendall_Tau', 'kendall_tau'),
])
def test_metric_aliases(alias, canonical):
    assert resolve_metric(alias) == canonical
    assert canonical in METRICS


def test_unknown_metric():
    with pytest.raises(ValueError, match="unknown metric"):
        evaluate_metric('footrule', IDENTITY5, IDENTITY5)


def test_evaluate_metric_returns_named_value():
    value = evaluate_metric('shreyan', IDENTITY5, perm(2, 1, 3, 5, 4))
    assert value.name == 'shreyan'
    assert value.value == pytest.approx(0.7)


def test_symmetric_similarity_averages_both_directions():
    identity, cycle = perm(1, 2, 3), perm(2, 3, 1)
    assert symmetric_similarity('shreyan', identity, cycle) == pytest.approx(1 / 9)
    assert evaluate_metric('shreyan', identity, cycle, symmetric=True).value == pytest.approx(1 / 9)


@given(permutation_pairs(12))
def test_symmetric_similarity_is_order_independent(pair):
    r, r_star = Permutation(tuple(pair[0])), Permutation(tuple(pair[1]))
    assert symmetric_similarity('shreyan', r, r_star) == pytest.approx(symmetric_similarity('shreyan', r_star, r))
