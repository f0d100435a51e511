"""Precision, recall and F-measure for the match class."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import InputError


@dataclass(frozen=True)
class PRF:
    precision: float
    recall: float
    f_measure: float
    tp: int
    fp: int
    fn: int
    tn: int

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int = 0) -> "PRF":
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        return cls(p, r, f, int(tp), int(fp), int(fn), int(tn))

    def as_dict(self) -> dict:
        return asdict(self)


def prf(labels, predictions) -> PRF:
    y = np.asarray(labels).astype(bool)
    p = np.asarray(predictions).astype(bool)
    if y.shape != p.shape:
        raise InputError(f"labels and predictions differ in length ({y.size} vs {p.size})")
    if y.size == 0:
        raise InputError("prf needs at least one prediction")
    tp = int(np.sum(y & p))
    fp = int(np.sum(~y & p))
    fn = int(np.sum(y & ~p))
    tn = int(np.sum(~y & ~p))
    return PRF.from_counts(tp, fp, fn, tn)


def per_type_prf(labels, predictions, types: Sequence) -> dict[str, PRF]:
    """:func:`prf` restricted to the pairs of each type (by KG1 entity type)."""
    y = np.asarray(labels)
    p = np.asarray(predictions)
    if not (len(y) == len(p) == len(types)):
        raise InputError("labels, predictions and types must have equal length")
    for i, t in enumerate(types):
        if t is None:
            raise InputError(f"pair {i} has no type")
    t_arr = np.asarray(list(types), dtype=object)
    return {str(t): prf(y[t_arr == t], p[t_arr == t]) for t in sorted(set(types), key=str)}


def micro_average(results: Mapping[str, PRF]) -> PRF:
    """Pool the confusion counts of several PRF records."""
    tp = sum(r.tp for r in results.values())
    fp = sum(r.fp for r in results.values())
    fn = sum(r.fn for r in results.values())
    tn = sum(r.tn for r in results.values())
    return PRF.from_counts(tp, fp, fn, tn)
