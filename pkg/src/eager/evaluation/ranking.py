"""Comparison of k methods over N datasets by average ranks.

The procedure: rank the methods on every dataset (1 = best, ties get the mean
rank), average the ranks, test them for equality with the Friedman
chi-square statistic and, if rejected, compare pairs with the Nemenyi
critical distance.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaincc

from ..errors import InputError

# Nemenyi critical values q_alpha = (studentized range quantile, df=inf) / sqrt(2).
# k = 2..10: the standard published Nemenyi table.  k = 11..20: scipy.stats.studentized_range
# ppf(1 - alpha, k, inf) / sqrt(2), rounded to three decimals.
NEMENYI_Q = {
    0.05: (
        1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
        3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544,
    ),
    0.10: (
        1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920,
        2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291, 3.319,
    ),
}
MIN_K, MAX_K = 2, 20


def _as_matrix(scores) -> np.ndarray:
    S = np.asarray(scores, dtype=np.float64)
    if S.ndim != 2:
        raise InputError(f"score matrix must be 2-D, got shape {S.shape}")
    if not np.isfinite(S).all():
        raise InputError("score matrix contains non-finite entries")
    return S


def _rank_row(row: np.ndarray) -> np.ndarray:
    """Rank 1 for the largest value; tied values share their mean position."""
    order = np.argsort(-row, kind="stable")
    ranks = np.empty(len(row))
    vals = row[order]
    i = 0
    while i < len(row):
        j = i
        while j + 1 < len(row) and vals[j + 1] == vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def rank_matrix(scores, higher_is_better: bool = True) -> np.ndarray:
    S = _as_matrix(scores)
    if not higher_is_better:
        S = -S
    return np.vstack([_rank_row(r) for r in S]) if len(S) else S


def average_ranks(scores, higher_is_better: bool = True) -> np.ndarray:
    S = _as_matrix(scores)
    if S.shape[0] < 1 or S.shape[1] < 2:
        raise InputError(f"need N >= 1 datasets and k >= 2 methods, got shape {S.shape}")
    return rank_matrix(S, higher_is_better).mean(axis=0)


def chi2_sf(x: float, df: int) -> float:
    """Chi-square survival function via the regularized upper incomplete gamma."""
    if x <= 0:
        return 1.0
    return float(gammaincc(df / 2.0, x / 2.0))


@dataclass(frozen=True)
class FriedmanResult:
    chi2: float
    p: float
    iman_davenport_f: float
    iman_davenport_p: float
    df: int

    def __iter__(self):
        return iter((self.chi2, self.p))


def friedman_test(scores, higher_is_better: bool = True) -> FriedmanResult:
    """Friedman chi-square statistic on tie-averaged ranks (no tie correction).

    Also reports the Iman-Davenport F refinement,
    ``F = (N-1) chi2 / (N(k-1) - chi2)`` on ``(k-1, (k-1)(N-1))`` degrees of
    freedom.  Unpacking the result yields ``(chi2, p)``.
    """
    S = _as_matrix(scores)
    N, k = S.shape
    if N < 2 or k < 2:
        raise InputError(f"Friedman test needs N >= 2 datasets and k >= 2 methods, got N={N}, k={k}")
    R = average_ranks(S, higher_is_better)
    chi2 = 12.0 * N / (k * (k + 1)) * (float(np.sum(R**2)) - k * (k + 1) ** 2 / 4.0)
    chi2 = max(chi2, 0.0)
    p = chi2_sf(chi2, k - 1)
    denom = N * (k - 1) - chi2
    if denom > 0:
        from scipy.stats import f as f_dist

        ff = (N - 1) * chi2 / denom
        fp = float(f_dist.sf(ff, k - 1, (k - 1) * (N - 1)))
    else:
        ff, fp = math.inf, 0.0
    return FriedmanResult(chi2, p, ff, fp, k - 1)


def nemenyi_q(k: int, alpha: float = 0.05) -> float:
    if alpha not in NEMENYI_Q:
        raise InputError(f"alpha must be one of {sorted(NEMENYI_Q)}, got {alpha}")
    if not MIN_K <= k <= MAX_K:
        raise InputError(f"Nemenyi table covers k = {MIN_K}..{MAX_K}, got k={k}")
    return NEMENYI_Q[alpha][k - MIN_K]


def nemenyi_cd(k: int, N: int, alpha: float = 0.05) -> float:
    """Critical distance ``q_alpha(k) * sqrt(k(k+1) / (6N))``."""
    if N < 1:
        raise InputError("N must be >= 1")
    return nemenyi_q(k, alpha) * math.sqrt(k * (k + 1) / (6.0 * N))


def nemenyi_groups(avg_ranks: Sequence[float], cd: float) -> list[tuple[int, ...]]:
    """Maximal sets of methods whose pairwise rank differences are all < ``cd``.

    These are the maximal cliques of the interval graph on the ranks.  Groups
    are returned as method indices sorted by rank, ordered by their best
    member; single-method groups are omitted.
    """
    r = np.asarray(avg_ranks, dtype=np.float64)
    order = np.argsort(r, kind="stable")
    groups = []
    last_end = -1
    for i in range(len(order)):
        j = i
        while j + 1 < len(order) and r[order[j + 1]] - r[order[i]] < cd:
            j += 1
        if j > last_end:
            if j > i:
                groups.append(tuple(int(x) for x in order[i : j + 1]))
            last_end = j
    return groups


@dataclass
class RankReport:
    methods: list[str]
    datasets: list[str]
    scores: list[list[float]]
    avg_ranks: list[float]
    friedman_chi2: float
    friedman_p: float
    iman_davenport_f: float
    iman_davenport_p: float
    cd: float
    alpha: float
    groups: list[list[str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def significantly_different(self, a: str, b: str) -> bool:
        ia, ib = self.methods.index(a), self.methods.index(b)
        return abs(self.avg_ranks[ia] - self.avg_ranks[ib]) >= self.cd


def rank_report(scores, methods, datasets, alpha: float = 0.05, higher_is_better: bool = True) -> RankReport:
    S = _as_matrix(scores)
    N, k = S.shape
    if len(methods) != k or len(datasets) != N:
        raise InputError("method/dataset names do not match the score matrix shape")
    ranks = average_ranks(S, higher_is_better)
    fr = friedman_test(S, higher_is_better)
    cd = nemenyi_cd(k, N, alpha)
    groups = [[methods[i] for i in g] for g in nemenyi_groups(ranks, cd)]
    return RankReport(
        methods=list(methods),
        datasets=list(datasets),
        scores=S.tolist(),
        avg_ranks=ranks.tolist(),
        friedman_chi2=fr.chi2,
        friedman_p=fr.p,
        iman_davenport_f=fr.iman_davenport_f,
        iman_davenport_p=fr.iman_davenport_p,
        cd=cd,
        alpha=alpha,
        groups=groups,
    )


def read_score_csv(path) -> tuple[list[str], list[str], np.ndarray]:
    """Score matrix CSV: header row of method names, first column dataset names."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise InputError(f"{path}: need a header row and at least one dataset row")
    methods = [m.strip() for m in rows[0][1:]]
    datasets, values = [], []
    for lineno, r in enumerate(rows[1:], 2):
        if len(r) != len(methods) + 1:
            raise InputError(f"{path}:{lineno}: expected {len(methods) + 1} columns, got {len(r)}")
        datasets.append(r[0].strip())
        try:
            values.append([float(x) for x in r[1:]])
        except ValueError:
            raise InputError(f"{path}:{lineno}: non-numeric score") from None
    return methods, datasets, np.array(values)
