"""Fold splits, negative sampling and feature matrices."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .embedding import EmbeddingTable, pair_feature_matrix
from .errors import InputError, NegativeSamplingError
from .ingest import N_FOLDS
from .kg import AlignmentSet, EntityRef, Fold, KnowledgeGraph
from .similarity import AttributeProfile, attr_feature_vector

VARIANTS = ("A", "E", "A||E")
_VARIANT_ALIASES = {"A": "A", "E": "E", "A||E": "A||E", "A‖E": "A||E", "AE": "A||E", "A|E": "A||E"}

MATCH, NON_MATCH = 1, 0


def canonical_variant(variant: str) -> str:
    try:
        return _VARIANT_ALIASES[variant]
    except KeyError:
        raise InputError(f"unknown variant {variant!r}; expected one of {VARIANTS}") from None


class LabeledPair(NamedTuple):
    e1: EntityRef
    e2: EntityRef
    label: int


def split_folds(gold: AlignmentSet, seed: int = 0) -> list[Fold]:
    """Five 20/10/70 train/validation/test splits of ``gold``.

    The shuffled gold set is cut into five chunks; fold ``i`` trains on chunk
    ``i``, so training sets of different folds are disjoint.  The remaining
    pairs are reshuffled per fold; the first ``round(0.2 n - t / 2)`` of them
    (``t`` = chunk size) form the validation set and the rest the test set.
    Splitting the chunk's rounding error between validation and test keeps
    all three parts within one pair of 20/10/70.
    """
    n = len(gold)
    if n < 10:
        raise InputError(f"split_folds needs at least 10 gold pairs, got {n}")
    pairs = np.array(gold.sorted_pairs(), dtype=np.int64)
    ss = np.random.SeedSequence(seed)
    master, *per_fold = [np.random.default_rng(s) for s in ss.spawn(N_FOLDS + 1)]
    perm = master.permutation(n)
    chunks = np.array_split(perm, N_FOLDS)
    folds = []
    for i in range(N_FOLDS):
        train_idx = chunks[i]
        n_valid = (2 * n - 5 * len(train_idx) + 5) // 10
        rest = np.concatenate([c for j, c in enumerate(chunks) if j != i])
        rest = per_fold[i].permutation(rest)
        valid_idx, test_idx = rest[:n_valid], rest[n_valid:]
        folds.append(
            Fold(
                train=AlignmentSet(map(tuple, pairs[train_idx]), "train"),
                validation=AlignmentSet(map(tuple, pairs[valid_idx]), "validation"),
                test=AlignmentSet(map(tuple, pairs[test_idx]), "test"),
            )
        )
    return folds


def sample_negatives(
    positives,
    kg1: KnowledgeGraph,
    kg2: KnowledgeGraph,
    forbidden: AlignmentSet | None = None,
    ratio: float = 1.0,
    seed=0,
) -> list[LabeledPair]:
    """Positives plus ``ceil(ratio * |positives|)`` corrupted non-matches.

    Each negative replaces, with equal probability, the KG1 or the KG2 side of
    a uniformly drawn positive by a uniform random entity of that graph.
    Candidates in ``forbidden``, among the positives or already drawn are
    rejected; after ``1000 * needed`` draws sampling gives up.

    Positives come first in sorted order, then negatives in draw order.
    """
    pos = sorted(positives.pairs if isinstance(positives, AlignmentSet) else set(positives))
    pos_set = set(pos)
    banned = set(forbidden.pairs) if forbidden is not None else set()
    needed = math.ceil(ratio * len(pos)) if pos else 0
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n1, n2 = kg1.n_entities, kg2.n_entities
    negatives: list[tuple[int, int]] = []
    chosen: set[tuple[int, int]] = set()
    max_draws = 1000 * needed
    draws = 0
    while len(negatives) < needed:
        if draws >= max_draws:
            raise NegativeSamplingError(
                f"negative pool exhausted: found {len(negatives)} of {needed} negatives after {draws} draws"
            )
        draws += 1
        a, b = pos[int(rng.integers(len(pos)))]
        if rng.random() < 0.5:
            a = int(rng.integers(n1))
        else:
            b = int(rng.integers(n2))
        cand = (a, b)
        if cand in banned or cand in pos_set or cand in chosen:
            continue
        chosen.add(cand)
        negatives.append(cand)
    out = [LabeledPair(EntityRef(1, a), EntityRef(2, b), MATCH) for a, b in pos]
    out += [LabeledPair(EntityRef(1, a), EntityRef(2, b), NON_MATCH) for a, b in negatives]
    return out


@dataclass
class FeatureMatrix:
    variant: str
    X: np.ndarray
    y: np.ndarray
    pairs: list[LabeledPair] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or len(self.X) != len(self.y):
            raise InputError(f"feature matrix shape {self.X.shape} does not match {len(self.y)} labels")

    @property
    def feature_dim(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return len(self.y)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"f{i}" for i in range(self.feature_dim)] + ["label"])
            for row, label in zip(self.X, self.y):
                w.writerow([repr(float(x)) for x in row] + [int(label)])

    @classmethod
    def from_csv(cls, path, variant: str = "A") -> "FeatureMatrix":
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][-1] != "label":
            raise InputError(f"{path}: header must end with 'label'")
        body = rows[1:]
        width = len(rows[0]) - 1
        X = np.array([[float(x) for x in r[:-1]] for r in body]).reshape(len(body), width)
        y = np.array([int(r[-1]) for r in body], dtype=np.int64)
        return cls(canonical_variant(variant), X, y)


class AttributeFeaturizer:
    """Caches similarity vectors per entity pair across folds and variants."""

    def __init__(self, profiles: Mapping, matcher: str = "greedy"):
        self.profiles = profiles
        self.matcher = matcher
        self._cache: dict[tuple, tuple[float, float, float]] = {}

    def _text(self, ref):
        p = self.profiles[ref]
        return p.text if isinstance(p, AttributeProfile) else p

    def __call__(self, pairs: Sequence) -> np.ndarray:
        out = np.empty((len(pairs), 3))
        for i, p in enumerate(pairs):
            key = (p[0], p[1])
            vec = self._cache.get(key)
            if vec is None:
                vec = attr_feature_vector(self._text(p[0]), self._text(p[1]), self.matcher).as_tuple()
                self._cache[key] = vec
            out[i] = vec
        return out


def assemble_features(
    pairs: Sequence[LabeledPair],
    variant: str,
    profiles=None,
    table: EmbeddingTable | None = None,
    mode: str = "concat",
) -> FeatureMatrix:
    """Feature rows for the A (attributes), E (embeddings) or A||E variant.

    ``profiles`` is a mapping EntityRef -> profile (or an
    :class:`AttributeFeaturizer`); A||E rows are the three similarities
    followed by the embedding features.
    """
    variant = canonical_variant(variant)
    if variant != "A" and table is None:
        raise InputError(f"variant {variant} needs an embedding table")
    if variant != "E" and profiles is None:
        raise InputError(f"variant {variant} needs attribute profiles")
    y = np.array([p[2] for p in pairs], dtype=np.int64)
    blocks = []
    if variant in ("A", "A||E"):
        featurize = profiles if isinstance(profiles, AttributeFeaturizer) else AttributeFeaturizer(profiles)
        blocks.append(featurize(pairs))
    if variant in ("E", "A||E"):
        blocks.append(pair_feature_matrix(table, [(p[0], p[1]) for p in pairs], mode))
    X = np.hstack(blocks) if len(blocks) > 1 else blocks[0]
    return FeatureMatrix(variant, X.reshape(len(pairs), -1), y, list(pairs))
