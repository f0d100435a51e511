"""Random forest of CART trees (Gini impurity) for binary match classification."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import InputError, TrainingError

LEAF = -1


@dataclass(frozen=True)
class RandomForestConfig:
    n_trees: int = 500
    max_depth: int | None = None
    min_samples_split: int = 2
    features_per_split: int | None = None
    bootstrap: bool = True
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise InputError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise InputError("max_depth must be >= 0 or None")
        if self.min_samples_split < 2:
            raise InputError("min_samples_split must be >= 2")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise InputError("features_per_split must be >= 1 or None")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("n_jobs")
        return d


@dataclass
class Tree:
    """Flat array representation; node 0 is the root.

    ``value`` holds the fraction of match samples reaching each node;
    internal nodes send ``x[feature] <= threshold`` to ``left``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(len(X), dtype=np.int64)
        active = np.flatnonzero(self.feature[node] != LEAF)
        while active.size:
            cur = node[active]
            go_left = X[active, self.feature[cur]] <= self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
            active = active[self.feature[node[active]] != LEAF]
        return node

    def vote(self, X: np.ndarray) -> np.ndarray:
        return (self.value[self.apply(X)] >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.asarray(d["threshold"], dtype=np.float64),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            value=np.asarray(d["value"], dtype=np.float64),
        )


def _best_split(X, y, rng, max_features):
    """Lowest weighted-Gini split over randomly ordered features.

    Features are visited in random order until ``max_features`` non-constant
    ones have been evaluated, so a valid split is found whenever one exists.
    """
    n = len(y)
    n_pos = y.sum()
    best_score, best_feat, best_thr = np.inf, LEAF, 0.0
    evaluated = 0
    nl = np.arange(1, n)
    nr = n - nl
    for f in rng.permutation(X.shape[1]):
        x = X[:, f]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        if xs[0] == xs[-1]:
            continue
        evaluated += 1
        left_pos = np.cumsum(y[order])[:-1]
        pl = left_pos / nl
        pr = (n_pos - left_pos) / nr
        score = (nl * pl * (1.0 - pl) + nr * pr * (1.0 - pr)) * 2.0 / n
        score[xs[1:] <= xs[:-1]] = np.inf
        i = int(np.argmin(score))
        if score[i] < best_score:
            thr = 0.5 * (xs[i] + xs[i + 1])
            if thr >= xs[i + 1]:
                thr = xs[i]
            best_score, best_feat, best_thr = score[i], int(f), float(thr)
        if evaluated >= max_features:
            break
    return best_feat, best_thr


def build_tree(X, y, rng, max_features, max_depth=None, min_samples_split=2) -> Tree:
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(idx):
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        value.append(float(y[idx].mean()))
        return len(feature) - 1

    stack = [(np.arange(len(y)), 0, new_node(np.arange(len(y))))]
    while stack:
        idx, depth, node = stack.pop()
        yn = y[idx]
        n_pos = yn.sum()
        if (
            n_pos == 0
            or n_pos == len(yn)
            or len(yn) < min_samples_split
            or (max_depth is not None and depth >= max_depth)
        ):
            continue
        f, thr = _best_split(X[idx], yn, rng, max_features)
        if f == LEAF:
            continue
        mask = X[idx, f] <= thr
        li, ri = idx[mask], idx[~mask]
        feature[node], threshold[node] = f, thr
        left[node], right[node] = new_node(li), new_node(ri)
        stack.append((ri, depth + 1, right[node]))
        stack.append((li, depth + 1, left[node]))
    return Tree(
        np.array(feature, dtype=np.int64),
        np.array(threshold, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )


@dataclass
class ForestModel:
    trees: list[Tree]
    feature_dim: int
    config: RandomForestConfig
    metadata: dict = field(default_factory=dict)
    kind: str = "rf"

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting match."""
        votes = np.zeros(len(X))
        for tree in self.trees:
            votes += tree.vote(X)
        return votes / len(self.trees)


def _unpack(X, y):
    if y is None:
        X, y = X.X, X.y
    return X, y


def train_rf(X, y=None, cfg: RandomForestConfig = RandomForestConfig()) -> ForestModel:
    """Grow ``cfg.n_trees`` trees; ``X`` may be a FeatureMatrix when ``y`` is None.

    Each tree draws from its own generator spawned from ``cfg.seed``, so the
    forest does not depend on ``n_jobs``.
    """
    X, y = _unpack(X, y)
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise InputError(f"bad training data shapes {X.shape} / {y.shape}")
    if len(y) < 2:
        raise TrainingError("random forest needs at least two rows")
    if len(np.unique(y)) < 2:
        raise TrainingError("random forest needs both classes in the training data")
    n, n_feat = X.shape
    max_features = cfg.features_per_split or math.ceil(math.sqrt(n_feat))
    max_features = min(max_features, n_feat)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_trees)

    def grow(ss):
        rng = np.random.default_rng(ss)
        idx = rng.integers(0, n, size=n) if cfg.bootstrap else np.arange(n)
        return build_tree(X[idx], y[idx], rng, max_features, cfg.max_depth, cfg.min_samples_split)

    if cfg.n_jobs > 1:
        with ThreadPoolExecutor(cfg.n_jobs) as pool:
            trees = list(pool.map(grow, seeds))
    else:
        trees = [grow(ss) for ss in seeds]
    meta = {"seed": cfg.seed, "n_rows": int(n), "features_per_split": int(max_features)}
    return ForestModel(trees, n_feat, cfg, meta)
