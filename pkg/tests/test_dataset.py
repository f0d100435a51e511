import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eager.dataset import (
    MATCH,
    NON_MATCH,
    AttributeFeaturizer,
    FeatureMatrix,
    LabeledPair,
    assemble_features,
    canonical_variant,
    sample_negatives,
    split_folds,
)
from eager.embedding import EmbeddingTable
from eager.errors import InputError, NegativeSamplingError
from eager.kg import AlignmentSet, EntityRef, KnowledgeGraph, check_fold_partition
from eager.similarity import ProfileIndex


def gold(n):
    return AlignmentSet([(i, i) for i in range(n)])


def graphs(n1, n2):
    kg1, kg2 = KnowledgeGraph(), KnowledgeGraph()
    for i in range(n1):
        kg1.add_attribute_triple(f"a{i}", "name", f"name {i}")
    for j in range(n2):
        kg2.add_attribute_triple(f"b{j}", "label", f"name {j}")
    return kg1.seal(), kg2.seal()


# -- folds ----------------------------------------------------------------------------


def test_hundred_pairs_split_20_10_70():
    for f in split_folds(gold(100), seed=0):
        assert (len(f.train), len(f.validation), len(f.test)) == (20, 10, 70)


def test_ten_pairs_split_2_1_7():
    for f in split_folds(gold(10), seed=0):
        assert (len(f.train), len(f.validation), len(f.test)) == (2, 1, 7)


def test_split_is_deterministic_and_folds_differ():
    a, b = split_folds(gold(50), 4), split_folds(gold(50), 4)
    assert a == b
    assert len({f.train for f in a}) == 5
    assert split_folds(gold(50), 5) != a


def test_split_needs_ten_pairs():
    with pytest.raises(InputError):
        split_folds(gold(9))


@given(st.integers(10, 400), st.integers(0, 2**32))
def test_every_fold_partitions_gold_with_stated_proportions(n, seed):
    g = gold(n)
    folds = split_folds(g, seed)
    assert len(folds) == 5
    for f in folds:
        check_fold_partition(g, f)
        assert f.train.role == "train" and f.validation.role == "validation" and f.test.role == "test"
        assert abs(len(f.train) - 0.2 * n) <= 1
        assert abs(len(f.validation) - 0.1 * n) <= 1
        assert abs(len(f.test) - 0.7 * n) <= 1
    # training chunks are disjoint and cover gold
    trains = [f.train.pairs for f in folds]
    assert sum(len(t) for t in trains) == n
    assert frozenset().union(*trains) == g.pairs


# -- negative sampling ----------------------------------------------------------------


def test_three_positives_ratio_one():
    kg1, kg2 = graphs(10, 10)
    out = sample_negatives(gold(3), kg1, kg2, seed=0)
    labels = [p.label for p in out]
    assert len(out) == 6 and labels.count(MATCH) == 3 and labels.count(NON_MATCH) == 3


def test_ratio_two():
    kg1, kg2 = graphs(10, 10)
    out = sample_negatives(gold(4), kg1, kg2, ratio=2, seed=0)
    assert sum(p.label == NON_MATCH for p in out) == 8


def test_fractional_ratio_rounds_up():
    kg1, kg2 = graphs(10, 10)
    out = sample_negatives(gold(3), kg1, kg2, ratio=0.5, seed=0)
    assert sum(p.label == NON_MATCH for p in out) == math.ceil(1.5)


def test_exhausted_pool_raises():
    kg1, kg2 = graphs(3, 3)
    pos = AlignmentSet([(0, 0)])
    everything = AlignmentSet([(a, b) for a in range(3) for b in range(3) if (a, b) != (0, 0)])
    with pytest.raises(NegativeSamplingError):
        sample_negatives(pos, kg1, kg2, forbidden=everything, seed=0)


def test_negatives_are_single_side_corruptions():
    kg1, kg2 = graphs(30, 30)
    pos = AlignmentSet([(i, i) for i in range(10)])
    for p in sample_negatives(pos, kg1, kg2, seed=2):
        if p.label == NON_MATCH:
            a, b = p.e1.id, p.e2.id
            assert (a, a) in pos or (b, b) in pos


def test_sampling_deterministic_and_generator_accepted():
    kg1, kg2 = graphs(20, 20)
    a = sample_negatives(gold(5), kg1, kg2, seed=11)
    b = sample_negatives(gold(5), kg1, kg2, seed=np.random.default_rng(11))
    assert a == b


@given(st.integers(5, 40), st.integers(1, 10), st.integers(0, 2**32), st.floats(0.5, 3.0))
def test_negatives_avoid_forbidden_positives_and_duplicates(n, n_pos, seed, ratio):
    kg1, kg2 = graphs(n, n + 3)
    forbidden = AlignmentSet([(i, i) for i in range(n)] + [(i, (i + 1) % n) for i in range(n)])
    pos = AlignmentSet([(i, i) for i in range(min(n_pos, n))])
    out = sample_negatives(pos, kg1, kg2, forbidden=forbidden, ratio=ratio, seed=seed)
    negs = [(p.e1.id, p.e2.id) for p in out if p.label == NON_MATCH]
    assert len(negs) == math.ceil(ratio * len(pos))
    assert len(set(negs)) == len(negs)
    assert not set(negs) & forbidden.pairs
    assert not set(negs) & pos.pairs
    assert all(p.e1.kg_index == 1 and p.e2.kg_index == 2 for p in out)
    assert [(p.e1.id, p.e2.id) for p in out[: len(pos)]] == pos.sorted_pairs()


def test_exact_balance_at_ratio_one_over_folds():
    g = gold(60)
    kg1, kg2 = graphs(60, 60)
    for k, f in enumerate(split_folds(g, 1)):
        for part in (f.train, f.validation, f.test):
            out = sample_negatives(part, kg1, kg2, forbidden=g, seed=k)
            n_pos = sum(p.label == MATCH for p in out)
            assert n_pos == len(part) == len(out) - n_pos
            assert not {(p.e1.id, p.e2.id) for p in out if p.label == NON_MATCH} & g.pairs


# -- features -------------------------------------------------------------------------


def identical_profiles():
    kg1, kg2 = KnowledgeGraph(), KnowledgeGraph()
    kg1.add_attribute_triple("a", "n", "Get Out")
    kg2.add_attribute_triple("x", "m", "get out")
    return ProfileIndex(kg1, kg2)


def test_variant_a_identical_profiles():
    pair = LabeledPair(EntityRef(1, 0), EntityRef(2, 0), MATCH)
    fm = assemble_features([pair], "A", identical_profiles())
    assert fm.X.tolist() == [[1.0, 1.0, 1.0]] and fm.y.tolist() == [1]
    assert fm.feature_dim == 3


def test_variant_ae_dimension_and_slices():
    table = EmbeddingTable([[0.1, 0.2]], [[0.3, 0.4]])
    pair = LabeledPair(EntityRef(1, 0), EntityRef(2, 0), MATCH)
    ae = assemble_features([pair], "A||E", identical_profiles(), table)
    e = assemble_features([pair], "E", None, table)
    a = assemble_features([pair], "A", identical_profiles())
    assert ae.feature_dim == 3 + 4
    assert np.array_equal(ae.X[:, 3:], e.X)
    assert np.array_equal(ae.X[:, :3], a.X)


def test_embedding_table_required_for_e():
    pair = LabeledPair(EntityRef(1, 0), EntityRef(2, 0), MATCH)
    with pytest.raises(InputError):
        assemble_features([pair], "E", identical_profiles(), None)
    with pytest.raises(InputError):
        assemble_features([pair], "A||E", identical_profiles(), None)


def test_variant_aliases():
    assert canonical_variant("A‖E") == "A||E"
    with pytest.raises(InputError):
        canonical_variant("B")


def test_row_order_preserved_and_reproducible(small_pair):
    kg1, kg2, g = small_pair
    pairs = sample_negatives(g, kg1, kg2, seed=0)
    rng = np.random.default_rng(0)
    table = EmbeddingTable(rng.normal(size=(kg1.n_entities, 3)), rng.normal(size=(kg2.n_entities, 3)))
    feat = AttributeFeaturizer(ProfileIndex(kg1, kg2))
    fm = assemble_features(pairs, "A||E", feat, table, "diff")
    again = assemble_features(pairs, "A||E", ProfileIndex(kg1, kg2), table, "diff")
    assert np.array_equal(fm.X, again.X)
    assert fm.y.tolist() == [p.label for p in pairs]
    rev = assemble_features(pairs[::-1], "A||E", feat, table, "diff")
    assert np.array_equal(rev.X, fm.X[::-1])


def test_feature_csv_round_trip(tmp_path):
    fm = FeatureMatrix("A", np.array([[0.1, 1 / 3, 2.0], [0.0, 1.0, 1e-17]]), np.array([1, 0]))
    fm.to_csv(tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text(encoding="utf-8").splitlines()[0] == "f0,f1,f2,label"
    back = FeatureMatrix.from_csv(tmp_path / "f.csv")
    assert np.array_equal(back.X, fm.X) and np.array_equal(back.y, fm.y)


def test_feature_matrix_shape_check():
    with pytest.raises(InputError):
        FeatureMatrix("A", np.zeros((2, 3)), np.zeros(3))
