"""Deterministic synthetic graph pairs for tests and demos."""

from __future__ import annotations

import string

import numpy as np

from .kg import AlignmentSet, KnowledgeGraph

_SYLLABLES = [c + v for c in "bdfgklmnprstvz" for v in "aeiou"] + ["an", "el", "or", "is", "um"]
_LETTERS = string.ascii_lowercase


def toy_movie_kg() -> KnowledgeGraph:
    """The two-triple movie example: one relation and one attribute triple."""
    kg = KnowledgeGraph("toy")
    kg.add_relation_triple("dbr:Get_Out", "dbo:director", "dbr:Jordan_Peele")
    kg.add_attribute_triple("dbr:Jordan_Peele", "dbo:birthDate", "1979-02-21")
    return kg


def isomorphic_cycles(n_cycles: int = 6, cycle_len: int = 3):
    """Two graphs made of the same directed cycles under different IRIs.

    Edge ``i -> i+1`` of every cycle carries relation ``r{i}``, so one cycle
    position is one relation and the relation vectors can close the loop
    without collapsing it.  In cycle ``c`` node ``c % cycle_len`` is held
    out and the other nodes are seed-aligned; rotating the held-out position
    ties every KG2 relation to its KG1 twin through some fused edge.

    Returns
    -------
    kg1, kg2 : KnowledgeGraph
    seed, held_out : AlignmentSet
    """
    if cycle_len < 3 or n_cycles < 1:
        raise ValueError("need n_cycles >= 1 and cycle_len >= 3")
    kg1, kg2 = KnowledgeGraph("cycles1"), KnowledgeGraph("cycles2")
    seed_pairs, held = [], []
    for c in range(n_cycles):
        for i in range(cycle_len):
            j = (i + 1) % cycle_len
            kg1.add_relation_triple(f"a:c{c}n{i}", f"a:r{i}", f"a:c{c}n{j}")
            kg2.add_relation_triple(f"b:c{c}n{i}", f"b:r{i}", f"b:c{c}n{j}")
        for i in range(cycle_len):
            pair = (kg1.entity_id(f"a:c{c}n{i}"), kg2.entity_id(f"b:c{c}n{i}"))
            (held if i == c % cycle_len else seed_pairs).append(pair)
    return kg1.seal(), kg2.seal(), AlignmentSet(seed_pairs, "train"), AlignmentSet(held, "test")


def _word(rng, lo=2, hi=4) -> str:
    return "".join(_SYLLABLES[i] for i in rng.integers(len(_SYLLABLES), size=rng.integers(lo, hi + 1)))


def add_typos(s: str, p: float, rng) -> str:
    """Edit each character with probability ``p`` (substitute, delete or insert)."""
    out = []
    for ch in s:
        if rng.random() >= p:
            out.append(ch)
            continue
        op = rng.integers(3)
        if op == 0:
            out.append(_LETTERS[rng.integers(26)])
        elif op == 2:
            out.append(ch)
            out.append(_LETTERS[rng.integers(26)])
    return "".join(out)


def perturbed_copy(
    n_entities: int = 500,
    typo_prob: float = 0.1,
    drop_fraction: float = 0.3,
    edges_per_entity: int = 3,
    n_relations: int = 4,
    seed: int = 0,
):
    """A graph and a noisy copy of it with different IRIs and property names.

    Every entity has a name, a year and a short description.  The copy
    applies per-character typos with probability ``typo_prob`` to every value
    and drops ``drop_fraction`` of the relation triples.  Gold links pair each
    entity with its copy.
    """
    rng = np.random.default_rng(seed)
    kg1, kg2 = KnowledgeGraph("synthetic1"), KnowledgeGraph("synthetic2")
    types = ("person", "film", "company")
    perm = rng.permutation(n_entities)
    names1 = [f"kg1:e{i}" for i in range(n_entities)]
    names2 = [f"kg2:x{perm[i]}" for i in range(n_entities)]
    for i in range(n_entities):
        kg1.intern(names1[i])
    for i in np.argsort(perm):
        kg2.intern(names2[i])
    for i in range(n_entities):
        values = {
            "name": f"{_word(rng)} {_word(rng)}",
            "year": str(int(rng.integers(1900, 2021))),
            "description": " ".join(_word(rng, 1, 3) for _ in range(int(rng.integers(3, 6)))),
        }
        etype = types[int(rng.integers(len(types)))]
        for attr, v in values.items():
            kg1.add_attribute_triple(names1[i], f"kg1:{attr}", v)
            kg2.add_attribute_triple(names2[i], f"kg2:has_{attr}", add_typos(v, typo_prob, rng))
        kg1.add_attribute_triple(names1[i], "type", etype)
        kg2.add_attribute_triple(names2[i], "kg2:kind", etype)
    triples = set()
    for h in range(n_entities):
        for _ in range(edges_per_entity):
            t = int(rng.integers(n_entities - 1))
            t += t >= h
            triples.add((h, int(rng.integers(n_relations)), t))
    triples = sorted(triples)
    keep = rng.random(len(triples)) >= drop_fraction
    for (h, r, t), kept in zip(triples, keep):
        kg1.add_relation_triple(names1[h], f"kg1:rel{r}", names1[t])
        if kept:
            kg2.add_relation_triple(names2[h], f"kg2:p{r}", names2[t])
    gold = AlignmentSet(
        [(kg1.entity_id(names1[i]), kg2.entity_id(names2[i])) for i in range(n_entities)], "gold"
    )
    return kg1.seal(), kg2.seal(), gold


def write_perturbed_fixture(directory, seed: int = 0, **kwargs):
    """Write :func:`perturbed_copy` as an OpenEA directory with a manifest."""
    from .ingest import save_openea_dataset

    kg1, kg2, gold = perturbed_copy(seed=seed, **kwargs)
    return save_openea_dataset(directory, kg1, kg2, gold)
