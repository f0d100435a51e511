"""Attribute profiles and string similarity features.

Each entity is summarised by one profile string: all of its attribute values,
sorted by ``(attribute IRI, value)``, lowercased, NFC-normalized and joined
with single spaces.  A pair of profiles is compared with three measures, each
bounded to ``[0, 1]``:

* normalized Levenshtein similarity,
* Generalized Jaccard over alphanumeric tokens (Jaro inner measure),
* Dice coefficient over character trigrams.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import InputError
from .kg import EntityRef, KnowledgeGraph

_ALNUM_RUN = re.compile(r"[^\W_]+")


@dataclass(frozen=True)
class AttributeProfile:
    entity: EntityRef
    text: str


@dataclass(frozen=True)
class SimVector:
    lev: float
    gjac: float
    dice: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lev, self.gjac, self.dice)


def profile_text(values: Sequence[tuple[str, str]]) -> str:
    """Normalized concatenation of ``(attribute, value)`` pairs."""
    parts = (unicodedata.normalize("NFC", v.lower()) for _, v in sorted(values))
    return " ".join(parts)


def build_profile(kg: KnowledgeGraph, e: int, kg_index: int = 1) -> AttributeProfile:
    if not kg.has_entity(e):
        raise InputError(f"entity id {e} is not in {kg.name!r}")
    return AttributeProfile(EntityRef(kg_index, e), profile_text(kg.attributes_of(e)))


class ProfileIndex(Mapping):
    """Lazily built profiles for the entities of two graphs, keyed by EntityRef."""

    def __init__(self, kg1: KnowledgeGraph, kg2: KnowledgeGraph):
        self.kgs = {1: kg1, 2: kg2}
        self._cache: dict[EntityRef, AttributeProfile] = {}

    def __getitem__(self, ref):
        ref = EntityRef(*ref)
        prof = self._cache.get(ref)
        if prof is None:
            kg = self.kgs.get(ref.kg_index)
            if kg is None:
                raise KeyError(ref)
            prof = build_profile(kg, ref.id, ref.kg_index)
            self._cache[ref] = prof
        return prof

    def __iter__(self):
        for idx, kg in self.kgs.items():
            for e in range(kg.n_entities):
                yield EntityRef(idx, e)

    def __len__(self):
        return sum(kg.n_entities for kg in self.kgs.values())


# -- Levenshtein --------------------------------------------------------------


def levenshtein_distance(a: str, b: str) -> int:
    """Unit-cost edit distance over code points (two-row dynamic programme)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        append = cur.append
        for j, cb in enumerate(b, 1):
            cost = prev[j - 1] + (ca != cb)
            ins = cur[j - 1] + 1
            dele = prev[j] + 1
            if ins < cost:
                cost = ins
            if dele < cost:
                cost = dele
            append(cost)
        prev = cur
    return prev[-1]


def levenshtein_sim(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / longest


# -- trigram Dice -------------------------------------------------------------


def trigrams(s: str) -> Counter:
    """Multiset of unpadded character 3-grams; short strings are one gram."""
    if not s:
        return Counter()
    if len(s) < 3:
        return Counter([s])
    return Counter(s[i : i + 3] for i in range(len(s) - 2))


def trigram_dice_sim(a: str, b: str) -> float:
    ga, gb = trigrams(a), trigrams(b)
    total = sum(ga.values()) + sum(gb.values())
    if total == 0:
        return 1.0
    common = sum((ga & gb).values())
    return 2.0 * common / total


# -- Generalized Jaccard ------------------------------------------------------


def alnum_tokenize(s: str) -> list[str]:
    """Maximal runs of Unicode alphanumeric characters, in order."""
    return _ALNUM_RUN.findall(s)


def jaro(s: str, t: str) -> float:
    if s == t:
        return 1.0
    ls, lt = len(s), len(t)
    if ls == 0 or lt == 0:
        return 0.0
    window = max(max(ls, lt) // 2 - 1, 0)
    s_match = [False] * ls
    t_match = [False] * lt
    matches = 0
    for i, c in enumerate(s):
        lo, hi = max(0, i - window), min(lt, i + window + 1)
        for j in range(lo, hi):
            if not t_match[j] and t[j] == c:
                s_match[i] = t_match[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    j = 0
    for i in range(ls):
        if s_match[i]:
            while not t_match[j]:
                j += 1
            if s[i] != t[j]:
                transpositions += 1
            j += 1
    m = float(matches)
    return (m / ls + m / lt + (m - transpositions // 2) / m) / 3.0


def generalized_jaccard_sim(a: str, b: str, threshold: float = 0.5, matcher: str = "greedy") -> float:
    """Generalized Jaccard over the alphanumeric token sets of ``a`` and ``b``.

    Token pairs whose Jaro similarity reaches ``threshold`` are matched one to
    one, either greedily in descending similarity (``matcher="greedy"``) or by
    a maximum-weight assignment (``matcher="optimal"``).  The result is the sum
    of matched similarities over ``|X| + |Y| - #matches``.
    """
    xs = sorted(set(alnum_tokenize(a)))
    ys = sorted(set(alnum_tokenize(b)))
    if not xs and not ys:
        return 1.0
    if not xs or not ys:
        return 0.0
    if matcher == "greedy":
        cand = []
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                sim = jaro(x, y)
                if sim >= threshold:
                    cand.append((-sim, i, j))
        cand.sort()
        used_x, used_y = set(), set()
        total, n = 0.0, 0
        for neg, i, j in cand:
            if i in used_x or j in used_y:
                continue
            used_x.add(i)
            used_y.add(j)
            total -= neg
            n += 1
    elif matcher == "optimal":
        import numpy as np
        from scipy.optimize import linear_sum_assignment

        w = np.array([[jaro(x, y) for y in ys] for x in xs])
        w[w < threshold] = 0.0
        rows, cols = linear_sum_assignment(w, maximize=True)
        picked = w[rows, cols]
        picked = picked[picked > 0.0]
        total, n = float(picked.sum()), int(picked.size)
    else:
        raise ValueError(f"unknown matcher {matcher!r}")
    return total / (len(xs) + len(ys) - n)


def attr_feature_vector(p1, p2, matcher: str = "greedy") -> SimVector:
    """Apply the three measures to two profiles (or raw profile strings)."""
    a = p1.text if isinstance(p1, AttributeProfile) else p1
    b = p2.text if isinstance(p2, AttributeProfile) else p2
    return SimVector(
        lev=levenshtein_sim(a, b),
        gjac=generalized_jaccard_sim(a, b, matcher=matcher),
        dice=trigram_dice_sim(a, b),
    )
