"""In-memory knowledge graphs and cross-graph alignments.

A :class:`KnowledgeGraph` interns entity, relation and attribute IRIs into
dense per-graph integer ids and stores relation triples ``(head, rel, tail)``
and attribute triples ``(entity, attr, literal)`` as duplicate-free sets of id
tuples.  Cross-graph references carry the graph index (1 or 2) in an
:class:`EntityRef`.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import InputError

ROLES = ("gold", "train", "validation", "test")


def normalize_iri(iri: str) -> str:
    """NFC-normalize and trim an IRI; raise on empty results."""
    if not isinstance(iri, str):
        raise InputError(f"IRI must be a string, got {type(iri).__name__}")
    norm = unicodedata.normalize("NFC", iri).strip()
    if not norm:
        raise InputError("empty IRI")
    return norm


class _Interner:
    """Bijective string <-> dense id table."""

    __slots__ = ("_ids", "_names")

    def __init__(self):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []

    def intern(self, name: str) -> int:
        idx = self._ids.get(name)
        if idx is None:
            idx = len(self._names)
            self._ids[name] = idx
            self._names.append(name)
        return idx

    def get(self, name: str) -> int | None:
        return self._ids.get(name)

    def name(self, idx: int) -> str:
        return self._names[idx]

    def __len__(self):
        return len(self._names)

    def __iter__(self):
        return iter(self._names)

    def __contains__(self, name):
        return name in self._ids


class EntityRef(NamedTuple):
    """Reference to an entity of one of the two graphs (``kg_index`` 1 or 2)."""

    kg_index: int
    id: int


@dataclass(frozen=True)
class KGStats:
    entities: int
    relations: int
    attributes: int
    rel_triples: int
    attr_triples: int

    def as_dict(self) -> dict:
        return {
            "entities": self.entities,
            "relations": self.relations,
            "attributes": self.attributes,
            "rel_triples": self.rel_triples,
            "attr_triples": self.attr_triples,
        }


class KnowledgeGraph:
    """A knowledge graph with separate relation and attribute triple stores.

    Literals are stored verbatim.  The same IRI may be used both as a relation
    and as an attribute; the two namespaces are independent.

    After :meth:`seal` the graph rejects further mutation.
    """

    def __init__(self, name: str = "kg"):
        self.name = name
        self._entities = _Interner()
        self._relations = _Interner()
        self._attributes = _Interner()
        self._literals = _Interner()
        self.rel_triples: set[tuple[int, int, int]] = set()
        self.attr_triples: set[tuple[int, int, int]] = set()
        self._sealed = False

    # -- construction -----------------------------------------------------

    def _check_open(self):
        if self._sealed:
            raise RuntimeError(f"knowledge graph {self.name!r} is sealed")

    def intern(self, iri: str) -> int:
        """Return the dense id of entity ``iri``, creating it if needed."""
        iri = normalize_iri(iri)
        idx = self._entities.get(iri)
        if idx is not None:
            return idx
        self._check_open()
        return self._entities.intern(iri)

    def intern_relation(self, iri: str) -> int:
        iri = normalize_iri(iri)
        idx = self._relations.get(iri)
        if idx is not None:
            return idx
        self._check_open()
        return self._relations.intern(iri)

    def intern_attribute(self, iri: str) -> int:
        iri = normalize_iri(iri)
        idx = self._attributes.get(iri)
        if idx is not None:
            return idx
        self._check_open()
        return self._attributes.intern(iri)

    def add_relation_triple(self, head: str, relation: str, tail: str) -> tuple[int, int, int]:
        self._check_open()
        triple = (self.intern(head), self.intern_relation(relation), self.intern(tail))
        self.rel_triples.add(triple)
        return triple

    def add_attribute_triple(self, entity: str, attribute: str, value: str) -> tuple[int, int, int]:
        self._check_open()
        if not isinstance(value, str):
            raise InputError(f"literal must be a string, got {type(value).__name__}")
        triple = (self.intern(entity), self.intern_attribute(attribute), self._literals.intern(value))
        self.attr_triples.add(triple)
        return triple

    def seal(self) -> "KnowledgeGraph":
        self._sealed = True
        return self

    @property
    def sealed(self) -> bool:
        return self._sealed

    # -- lookups ------------------------------------------------------------

    def entity_id(self, iri: str) -> int | None:
        """Id of ``iri`` or None when the entity is unknown (never interns)."""
        try:
            return self._entities.get(normalize_iri(iri))
        except InputError:
            return None

    def entity_iri(self, idx: int) -> str:
        return self._entities.name(idx)

    def relation_iri(self, idx: int) -> str:
        return self._relations.name(idx)

    def attribute_iri(self, idx: int) -> str:
        return self._attributes.name(idx)

    def literal(self, idx: int) -> str:
        return self._literals.name(idx)

    def has_entity(self, idx: int) -> bool:
        return 0 <= idx < len(self._entities)

    @property
    def n_entities(self) -> int:
        return len(self._entities)

    @property
    def n_relations(self) -> int:
        return len(self._relations)

    @property
    def n_attributes(self) -> int:
        return len(self._attributes)

    @property
    def entities(self) -> list[str]:
        return list(self._entities)

    @property
    def relations(self) -> list[str]:
        return list(self._relations)

    @property
    def attributes(self) -> list[str]:
        return list(self._attributes)

    @property
    def literals(self) -> list[str]:
        return list(self._literals)

    def relation_triples_iri(self) -> list[tuple[str, str, str]]:
        """Relation triples as IRI strings, sorted."""
        e, r = self._entities.name, self._relations.name
        return sorted((e(h), r(p), e(t)) for h, p, t in self.rel_triples)

    def attribute_triples_iri(self) -> list[tuple[str, str, str]]:
        """Attribute triples as strings, sorted."""
        e, a, lit = self._entities.name, self._attributes.name, self._literals.name
        return sorted((e(s), a(p), lit(v)) for s, p, v in self.attr_triples)

    def attributes_of(self, idx: int) -> list[tuple[str, str]]:
        """``(attribute IRI, value)`` pairs of one entity, unsorted."""
        index = self._attr_index()
        return index.get(idx, [])

    def _attr_index(self):
        cache = getattr(self, "_attr_cache", None)
        if cache is not None and cache[0] == len(self.attr_triples):
            return cache[1]
        index: dict[int, list[tuple[str, str]]] = {}
        for s, p, v in self.attr_triples:
            index.setdefault(s, []).append((self._attributes.name(p), self._literals.name(v)))
        self._attr_cache = (len(self.attr_triples), index)
        return index

    def __repr__(self):
        s = kg_stats(self)
        return (
            f"KnowledgeGraph({self.name!r}, |E|={s.entities}, |R|={s.relations}, "
            f"|A|={s.attributes}, |T_R|={s.rel_triples}, |T_A|={s.attr_triples})"
        )


def intern(kg: KnowledgeGraph, iri: str) -> int:
    """Functional alias of :meth:`KnowledgeGraph.intern`."""
    return kg.intern(iri)


def kg_stats(kg: KnowledgeGraph) -> KGStats:
    return KGStats(
        entities=kg.n_entities,
        relations=kg.n_relations,
        attributes=kg.n_attributes,
        rel_triples=len(kg.rel_triples),
        attr_triples=len(kg.attr_triples),
    )


class AlignmentSet:
    """A set of ``(id in KG1, id in KG2)`` pairs tagged with a role.

    Iteration yields pairs in sorted order so downstream sampling is
    deterministic.
    """

    __slots__ = ("pairs", "role")

    def __init__(self, pairs: Iterable[tuple[int, int]] = (), role: str = "gold"):
        if role not in ROLES:
            raise InputError(f"unknown alignment role {role!r}; expected one of {ROLES}")
        self.pairs = frozenset((int(a), int(b)) for a, b in pairs)
        self.role = role

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(sorted(self.pairs))

    def __contains__(self, pair):
        return pair in self.pairs

    def __eq__(self, other):
        if not isinstance(other, AlignmentSet):
            return NotImplemented
        return self.pairs == other.pairs and self.role == other.role

    def __hash__(self):
        return hash((self.pairs, self.role))

    def __repr__(self):
        return f"AlignmentSet(role={self.role!r}, n={len(self.pairs)})"

    def with_role(self, role: str) -> "AlignmentSet":
        return AlignmentSet(self.pairs, role)

    def sorted_pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pairs)

    def validate(self, kg1: KnowledgeGraph, kg2: KnowledgeGraph) -> None:
        """Raise :class:`InputError` if a pair references a missing entity."""
        for a, b in self.pairs:
            if not kg1.has_entity(a):
                raise InputError(f"{self.role} pair references unknown KG1 entity id {a}")
            if not kg2.has_entity(b):
                raise InputError(f"{self.role} pair references unknown KG2 entity id {b}")

    @classmethod
    def from_iris(cls, kg1, kg2, iri_pairs, role="gold") -> "AlignmentSet":
        pairs = []
        for left, right in iri_pairs:
            a, b = kg1.entity_id(left), kg2.entity_id(right)
            if a is None:
                raise InputError(f"alignment references entity {left!r} missing from KG1")
            if b is None:
                raise InputError(f"alignment references entity {right!r} missing from KG2")
            pairs.append((a, b))
        return cls(pairs, role)

    def to_iris(self, kg1, kg2) -> list[tuple[str, str]]:
        return [(kg1.entity_iri(a), kg2.entity_iri(b)) for a, b in self]


@dataclass(frozen=True)
class Fold:
    train: AlignmentSet
    validation: AlignmentSet
    test: AlignmentSet


def check_fold_partition(gold: AlignmentSet, fold: Fold) -> None:
    """Raise if the fold's parts are not a disjoint cover of ``gold``."""
    tr, va, te = fold.train.pairs, fold.validation.pairs, fold.test.pairs
    if tr & va or tr & te or va & te:
        raise InputError("fold parts are not pairwise disjoint")
    if (tr | va | te) != gold.pairs:
        missing = len(gold.pairs - (tr | va | te))
        extra = len((tr | va | te) - gold.pairs)
        raise InputError(f"fold parts do not cover gold ({missing} missing, {extra} extra pairs)")
