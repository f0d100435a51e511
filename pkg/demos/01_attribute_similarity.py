"""Attribute profiles and the three string similarities.

Run with ``python demos/01_attribute_similarity.py``.
"""

from eager.kg import EntityRef
from eager.similarity import ProfileIndex, attr_feature_vector, generalized_jaccard_sim, jaro
from eager.synthetic import perturbed_copy

# A small graph and a noisy copy of it.  The copy uses other IRIs and
# property names, and every value went through random typos.
kg1, kg2, gold = perturbed_copy(n_entities=8, typo_prob=0.1, seed=1)
profiles = ProfileIndex(kg1, kg2)

# Each entity collapses to one lowercase string: its attribute values in
# attribute-IRI order, joined by spaces.
for a, b in gold.sorted_pairs()[:3]:
    p1, p2 = profiles[EntityRef(1, a)], profiles[EntityRef(2, b)]
    print(f"{kg1.entity_iri(a):>8}  {p1.text!r}")
    print(f"{kg2.entity_iri(b):>8}  {p2.text!r}")
    print("          lev / gjac / dice =", tuple(round(v, 3) for v in attr_feature_vector(p1, p2).as_tuple()))
    print()

# A non-matching pair scores much lower on all three.
a, _ = gold.sorted_pairs()[0]
_, b = gold.sorted_pairs()[1]
v = attr_feature_vector(profiles[EntityRef(1, a)], profiles[EntityRef(2, b)])
print("non-match lev / gjac / dice =", tuple(round(x, 3) for x in v.as_tuple()))

# Generalized Jaccard matches tokens whose Jaro similarity exceeds 0.5,
# so a misspelt token still counts for most of its weight.
print()
print("jaro('night', 'nacht') =", round(jaro("night", "nacht"), 4))
print("gjac('get out 2017', 'gte out') =", round(generalized_jaccard_sim("get out 2017", "gte out"), 4))
