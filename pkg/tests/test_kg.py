import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from eager.errors import InputError
from eager.kg import AlignmentSet, Fold, KnowledgeGraph, check_fold_partition, intern, kg_stats
from eager.synthetic import toy_movie_kg

iris = st.text(alphabet="abcxyz:/_ ", min_size=1, max_size=8).filter(lambda s: s.strip())


def test_intern_is_idempotent():
    kg = KnowledgeGraph()
    assert intern(kg, "dbr:Get_Out") == intern(kg, "dbr:Get_Out")


def test_intern_distinct_iris_get_distinct_ids():
    kg = KnowledgeGraph()
    assert intern(kg, "a") != intern(kg, "b")


@pytest.mark.parametrize("bad", ["", "   ", "\t"])
def test_intern_rejects_empty(bad):
    with pytest.raises(InputError):
        intern(KnowledgeGraph(), bad)


def test_intern_trims_and_nfc_normalizes():
    kg = KnowledgeGraph()
    composed = intern(kg, " café ")
    assert intern(kg, "café") == composed
    assert kg.entity_iri(composed) == "café"


def test_ids_are_dense():
    kg = KnowledgeGraph()
    ids = [intern(kg, f"e{i}") for i in range(5)]
    assert ids == list(range(5))


def test_empty_kg_stats_are_zero():
    assert kg_stats(KnowledgeGraph()).as_dict() == {
        "entities": 0, "relations": 0, "attributes": 0, "rel_triples": 0, "attr_triples": 0,
    }


def test_toy_movie_graph_stats():
    s = kg_stats(toy_movie_kg())
    assert (s.entities, s.relations, s.attributes, s.rel_triples, s.attr_triples) == (2, 1, 1, 1, 1)


@pytest.mark.skipif(not os.environ.get("EAGER_ABT_DIR"), reason="abt-buy benchmark not available offline")
def test_abt_stats_match_published_counts():
    from eager.ingest import load_kg_pair

    kg1, _, _ = load_kg_pair(os.environ["EAGER_ABT_DIR"])
    s = kg_stats(kg1)
    assert (s.relations, s.attributes, s.rel_triples, s.attr_triples, s.entities) == (3, 4, 2753, 2998, 1920)


def test_same_iri_may_be_relation_and_attribute():
    kg = KnowledgeGraph()
    kg.add_relation_triple("a", "p", "b")
    kg.add_attribute_triple("a", "p", "v")
    assert kg.relations == ["p"] and kg.attributes == ["p"]


def test_sealed_graph_rejects_writes():
    kg = toy_movie_kg().seal()
    with pytest.raises(RuntimeError):
        kg.add_relation_triple("x", "y", "z")


def test_entity_id_does_not_intern():
    kg = KnowledgeGraph()
    assert kg.entity_id("missing") is None
    assert kg.n_entities == 0


@given(st.lists(iris, max_size=30))
def test_interning_round_trip_is_identity(names):
    kg = KnowledgeGraph()
    ids = [kg.intern(n) for n in names]
    for n, i in zip(names, ids):
        assert kg.entity_id(kg.entity_iri(i)) == i
        assert kg.entity_iri(i) == n.strip()
    assert sorted(set(ids)) == list(range(kg.n_entities))


triple = st.tuples(iris, iris, iris)


@given(st.lists(triple, max_size=25), st.lists(triple, max_size=25))
def test_duplicates_do_not_change_stats_and_stats_match_recount(rels, attrs):
    kg = KnowledgeGraph()
    for h, r, t in rels:
        kg.add_relation_triple(h, r, t)
    for e, a, v in attrs:
        kg.add_attribute_triple(e, a, v)
    before = kg_stats(kg)
    for h, r, t in rels:
        kg.add_relation_triple(h, r, t)
    for e, a, v in attrs:
        kg.add_attribute_triple(e, a, v)
    assert kg_stats(kg) == before

    rt, at = kg.relation_triples_iri(), kg.attribute_triples_iri()
    ents = {h for h, _, _ in rt} | {t for _, _, t in rt} | {e for e, _, _ in at}
    assert before.rel_triples == len(set(rt)) == len(rt)
    assert before.attr_triples == len(set(at)) == len(at)
    assert before.entities == len(ents)
    assert before.relations == len({r for _, r, _ in rt})
    assert before.attributes == len({a for _, a, _ in at})


def test_every_referenced_entity_is_member(small_pair):
    kg1, _, _ = small_pair
    for h, _, t in kg1.rel_triples:
        assert kg1.has_entity(h) and kg1.has_entity(t)
    for e, _, _ in kg1.attr_triples:
        assert kg1.has_entity(e)


def test_alignment_set_deduplicates_and_validates():
    kg1, kg2 = KnowledgeGraph(), KnowledgeGraph()
    kg1.intern("a")
    kg2.intern("b")
    links = AlignmentSet([(0, 0), (0, 0)])
    assert len(links) == 1
    links.validate(kg1, kg2)
    with pytest.raises(InputError):
        AlignmentSet([(0, 1)]).validate(kg1, kg2)
    with pytest.raises(InputError):
        AlignmentSet([], role="bogus")


def test_alignment_from_iris_rejects_unknown_entity():
    kg1, kg2 = KnowledgeGraph(), KnowledgeGraph()
    kg1.intern("a")
    kg2.intern("b")
    assert AlignmentSet.from_iris(kg1, kg2, [("a", "b")]).to_iris(kg1, kg2) == [("a", "b")]
    with pytest.raises(InputError, match="'c'"):
        AlignmentSet.from_iris(kg1, kg2, [("a", "c")])


def test_fold_partition_check():
    gold = AlignmentSet([(i, i) for i in range(4)])
    ok = Fold(AlignmentSet([(0, 0)], "train"), AlignmentSet([(1, 1)], "validation"), AlignmentSet([(2, 2), (3, 3)], "test"))
    check_fold_partition(gold, ok)
    overlap = Fold(ok.train, AlignmentSet([(0, 0)], "validation"), ok.test)
    with pytest.raises(InputError, match="disjoint"):
        check_fold_partition(gold, overlap)
    missing = Fold(ok.train, ok.validation, AlignmentSet([(2, 2)], "test"))
    with pytest.raises(InputError, match="cover"):
        check_fold_partition(gold, missing)
