import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.ranking import (
    FeatureId,
    ImportanceRecord,
    Permutation,
    RankedList,
    canonicalize_pair,
    invert,
    rank_features,
    relabel,
)


def record(values, name='lime', instance_id=0):
    return ImportanceRecord.from_values(name, instance_id, values)


def ranked(*indices):
    return RankedList(tuple(FeatureId(i) for i in indices))


def test_rank_by_magnitude():
    assert rank_features(record([0.5, -0.9, 0.1])).indices == (1, 0, 2)


def test_rank_by_signed_score():
    assert rank_features(record([0.5, -0.9, 0.1]), by_absolute=False).indices == (0, 2, 1)


def test_all_zero_scores_fall_back_to_index_order():
    assert rank_features(record([0.0, 0.0, 0.0])).indices == (0, 1, 2)


def test_ties_broken_by_index():
    assert rank_features(record([3.0, 3.0, 5.0])).indices == (2, 0, 1)


def test_empty_record_rejected():
    with pytest.raises(ValueError, match="no features"):
        rank_features(ImportanceRecord('lime', 0, {}))


@pytest.mark.parametrize('bad', [float('nan'), float('inf'), float('-inf')])
def test_non_finite_score_rejected(bad):
    with pytest.raises(ValueError, match="invalid importance"):
        rank_features(record([1.0, bad]))


def test_record_names_are_labels():
    rec = ImportanceRecord.from_values('shap', 4, [1.0, 2.0], names=['age', 'income'])
    assert [f.label for f in rec.features] == ['age', 'income']
    assert rec.values().tolist() == [1.0, 2.0]


def test_record_name_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        ImportanceRecord.from_values('shap', 0, [1.0, 2.0], names=['a'])


def test_feature_equality_ignores_name():
    assert FeatureId(3, 'x3') == FeatureId(3)


def test_ranked_list_rejects_duplicates():
    with pytest.raises(ValueError):
        ranked(0, 1, 0)


@pytest.mark.parametrize('values', [(1, 1, 2), (0, 1, 2), (1, 2, 4), ()])
def test_permutation_rejects_non_bijections(values):
    with pytest.raises(ValueError):
        Permutation(values)


def test_canonicalize_worked_example():
    # A..E -> 0..4
    r, r_star = canonicalize_pair(ranked(0, 1, 2, 3, 4), ranked(1, 0, 2, 4, 3))
    assert r.values == (1, 2, 3, 4, 5)
    assert r_star.values == (2, 1, 3, 5, 4)


def test_canonicalize_identity_and_reversal():
    r, r_star = canonicalize_pair(ranked(0, 1, 2), ranked(0, 1, 2))
    assert r.values == r_star.values == (1, 2, 3)
    _, reversed_ = canonicalize_pair(ranked(0, 1, 2), ranked(2, 1, 0))
    assert reversed_.values == (3, 2, 1)


def test_canonicalize_uses_reference_labels():
    # reference order C, A, B
    _, r_star = canonicalize_pair(ranked(2, 0, 1), ranked(0, 1, 2))
    assert r_star.values == (2, 3, 1)


@pytest.mark.parametrize('other', [(0, 1), (0, 1, 3)])
def test_canonicalize_incomparable(other):
    with pytest.raises(ValueError, match="incomparable rankings"):
        canonicalize_pair(ranked(0, 1, 2), ranked(*other))


@pytest.mark.parametrize('p, expected', [
    ((2, 1, 3, 5, 4), (2, 1, 3, 5, 4)),
    ((2, 3, 1), (3, 1, 2)),
    ((1, 2, 3, 4), (1, 2, 3, 4)),
])
def test_invert_examples(p, expected):
    assert invert(Permutation(p)).values == expected


@given(st.integers(min_value=1, max_value=12).flatmap(lambda x: st.permutations(list(range(1, x + 1)))))
def test_invert_is_an_involution(values):
    p = Permutation(tuple(values))
    assert invert(invert(p)) == p


@given(st.integers(min_value=1, max_value=10).flatmap(lambda x: st.permutations(list(range(1, x + 1)))))
def test_relabel_against_itself_is_identity(values):
    p = Permutation(tuple(values))
    r, r_star = relabel(p, p)
    assert r == r_star == Permutation.identity(len(p))


@settings(max_examples=200)
@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=15), st.randoms())
def test_canonicalized_pairs_are_permutations(scores, rnd):
    shuffled = list(scores)
    rnd.shuffle(shuffled)
    r, r_star = canonicalize_pair(rank_features(record(scores)), rank_features(record(shuffled, 'shap')))
    assert sorted(r_star.values) == list(range(1, len(scores) + 1))
    assert r == Permutation.identity(len(scores))


@given(
    st.lists(st.floats(min_value=-1e3, max_value=1e3), min_size=1, max_size=12),
    st.floats(min_value=0.5, max_value=10.0),
    st.floats(min_value=-10.0, max_value=10.0),
)
def test_signed_ranking_invariant_under_positive_affine_maps(scores, scale, shift):
    scores = [round(s, 3) for s in scores]
    transformed = [scale * s + shift for s in scores]
    # only order matters, so skip inputs where rounding merges distinct scores
    if len(set(transformed)) != len(set(scores)):
        return
    before = rank_features(record(scores), by_absolute=False)
    after = rank_features(record(transformed), by_absolute=False)
    assert before.indices == after.indices
