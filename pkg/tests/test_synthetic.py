from eager.kg import kg_stats
from eager.synthetic import add_typos, isomorphic_cycles, perturbed_copy, toy_movie_kg

import numpy as np


def test_perturbed_copy_is_deterministic_and_sized():
    a, b = perturbed_copy(n_entities=40, seed=1), perturbed_copy(n_entities=40, seed=1)
    assert kg_stats(a[0]) == kg_stats(b[0]) and kg_stats(a[1]) == kg_stats(b[1])
    assert a[2] == b[2] and len(a[2]) == 40
    assert a[0].attribute_triples_iri() == b[0].attribute_triples_iri()


def test_perturbed_copy_drops_relations_on_one_side():
    kg1, kg2, _ = perturbed_copy(n_entities=300, seed=0)
    r1, r2 = kg_stats(kg1).rel_triples, kg_stats(kg2).rel_triples
    assert abs(r2 / r1 - 0.7) < 0.05


def test_typos_rate():
    rng = np.random.default_rng(0)
    s = "a" * 10_000
    assert add_typos(s, 0.0, rng) == s
    changed = sum(x != y for x, y in zip(add_typos("b" * 10_000, 0.1, rng), "b" * 10_000))
    assert changed > 0


def test_cycles_split_seed_and_held_out():
    kg1, kg2, seed, held = isomorphic_cycles(n_cycles=4, cycle_len=3)
    assert len(seed) == 8 and len(held) == 4
    assert not seed.pairs & held.pairs
    assert kg1.n_entities == kg2.n_entities == 12


def test_toy_graph():
    kg = toy_movie_kg()
    assert kg_stats(kg).rel_triples == 1
