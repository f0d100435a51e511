"""Shared entity embeddings for two graphs.

Embeddings come from one of two places:

* :func:`train_transe` fits a translational model (head + relation ~ tail)
  on the union of both graphs, where every seed-aligned pair is collapsed
  into a single node (:func:`merge_graphs`), so both graphs land in one
  vector space;
* :func:`load_embeddings` reads vectors trained elsewhere.

Embedding file format (UTF-8)::

    dim=<d>
    <kg_index>\\t<iri>\\t<v1> <v2> ... <vd>
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError, TrainingError
from .ingest import escape_field, unescape_field
from .kg import AlignmentSet, EntityRef, KnowledgeGraph

log = logging.getLogger(__name__)

PAIR_MODES = ("concat", "diff", "hadamard")


class EmbeddingTable:
    """Per-entity vectors for both graphs in one space.

    ``vectors1[i]`` is the vector of entity ``i`` of KG1, ``vectors2[j]`` that
    of entity ``j`` of KG2.
    """

    def __init__(self, vectors1, vectors2, loss_history=()):
        v1 = np.ascontiguousarray(vectors1, dtype=np.float64)
        v2 = np.ascontiguousarray(vectors2, dtype=np.float64)
        if v1.ndim != 2 or v2.ndim != 2 or v1.shape[1] != v2.shape[1]:
            raise InputError(f"embedding matrices must be 2-D with equal width, got {v1.shape} and {v2.shape}")
        if v1.shape[1] < 1:
            raise InputError("embedding dimension must be positive")
        if not (np.isfinite(v1).all() and np.isfinite(v2).all()):
            raise InputError("embedding table contains non-finite values")
        v1.flags.writeable = False
        v2.flags.writeable = False
        self.vectors1 = v1
        self.vectors2 = v2
        self.loss_history = tuple(float(x) for x in loss_history)

    @property
    def dim(self) -> int:
        return self.vectors1.shape[1]

    def matrix(self, kg_index: int) -> np.ndarray:
        if kg_index == 1:
            return self.vectors1
        if kg_index == 2:
            return self.vectors2
        raise KeyError(f"kg_index must be 1 or 2, got {kg_index}")

    def __getitem__(self, ref) -> np.ndarray:
        kg_index, idx = ref
        m = self.matrix(kg_index)
        if not 0 <= idx < m.shape[0]:
            raise KeyError(f"no embedding for entity {idx} of KG{kg_index}")
        return m[idx]

    def __contains__(self, ref):
        kg_index, idx = ref
        return kg_index in (1, 2) and 0 <= idx < self.matrix(kg_index).shape[0]

    def __eq__(self, other):
        if not isinstance(other, EmbeddingTable):
            return NotImplemented
        return np.array_equal(self.vectors1, other.vectors1) and np.array_equal(self.vectors2, other.vectors2)

    def __repr__(self):
        return f"EmbeddingTable(dim={self.dim}, n1={len(self.vectors1)}, n2={len(self.vectors2)})"


# -- merged graph ----------------------------------------------------------------


@dataclass
class MergedGraph:
    """Union of two graphs with seed-aligned entities fused.

    ``map1[i]`` / ``map2[j]`` give the merged node of KG1 entity ``i`` / KG2
    entity ``j``.  Relations of KG2 are offset by ``n_relations1`` so the two
    relation vocabularies stay disjoint.
    """

    n_entities: int
    n_relations: int
    n_relations1: int
    triples: np.ndarray
    map1: np.ndarray
    map2: np.ndarray

    def merged_id(self, ref) -> int:
        kg_index, idx = ref
        return int((self.map1 if kg_index == 1 else self.map2)[idx])

    def split(self) -> tuple[set[int], set[int]]:
        """Recover the original entity id sets of KG1 and KG2."""
        return set(range(len(self.map1))), set(range(len(self.map2)))

    def members(self) -> dict[int, list[EntityRef]]:
        out: dict[int, list[EntityRef]] = {}
        for i, m in enumerate(self.map1):
            out.setdefault(int(m), []).append(EntityRef(1, i))
        for j, m in enumerate(self.map2):
            out.setdefault(int(m), []).append(EntityRef(2, j))
        return out


def merge_graphs(kg1: KnowledgeGraph, kg2: KnowledgeGraph, seed: AlignmentSet | None = None) -> MergedGraph:
    n1, n2 = kg1.n_entities, kg2.n_entities
    parent = list(range(n1 + n2))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in (seed or ()):
        if not kg1.has_entity(a):
            raise InputError(f"seed pair references unknown KG1 entity id {a}")
        if not kg2.has_entity(b):
            raise InputError(f"seed pair references unknown KG2 entity id {b}")
        ra, rb = find(a), find(n1 + b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    comp: dict[int, int] = {}
    node = np.empty(n1 + n2, dtype=np.int64)
    for x in range(n1 + n2):
        root = find(x)
        if root not in comp:
            comp[root] = len(comp)
        node[x] = comp[root]
    map1, map2 = node[:n1], node[n1:]

    r1 = kg1.n_relations
    rows = {(int(map1[h]), r, int(map1[t])) for h, r, t in kg1.rel_triples}
    rows |= {(int(map2[h]), r1 + r, int(map2[t])) for h, r, t in kg2.rel_triples}
    triples = np.array(sorted(rows), dtype=np.int64).reshape(-1, 3)
    return MergedGraph(
        n_entities=len(comp),
        n_relations=r1 + kg2.n_relations,
        n_relations1=r1,
        triples=triples,
        map1=map1,
        map2=map2,
    )


# -- TransE ----------------------------------------------------------------------


@dataclass(frozen=True)
class TransEConfig:
    dim: int = 100
    margin: float = 1.0
    learning_rate: float = 0.01
    epochs: int = 500
    negatives: int = 1
    norm: str = "L2"
    batch_size: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("TransE dim must be >= 1")
        if self.margin <= 0 or self.learning_rate <= 0:
            raise InputError("TransE margin and learning rate must be positive")
        if self.epochs < 0:
            raise InputError("TransE epochs must be >= 0")
        if self.negatives < 1 or self.batch_size < 1:
            raise InputError("TransE negatives and batch_size must be >= 1")
        if self.norm not in ("L1", "L2"):
            raise InputError(f"TransE norm must be 'L1' or 'L2', got {self.norm!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def _normalize_rows(m: np.ndarray) -> None:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    np.divide(m, norms, out=m, where=norms > 0)


def translation_distance(h, r, t, norm="L2"):
    """Row-wise ``||h + r - t||``."""
    v = h + r - t
    if norm == "L1":
        return np.abs(v).sum(axis=-1)
    return np.sqrt((v * v).sum(axis=-1))


def _distance_grad(v, norm):
    """d||v|| / dv row-wise; zero at the kink."""
    if norm == "L1":
        return np.sign(v)
    n = np.sqrt((v * v).sum(axis=-1, keepdims=True))
    return np.divide(v, n, out=np.zeros_like(v), where=n > 0)


def margin_loss_and_grads(ent, rel, pos, neg, margin, norm="L2"):
    """Hinge losses ``max(0, margin + d(pos) - d(neg))`` and their gradients.

    Parameters
    ----------
    ent, rel : ndarray
        Entity and relation matrices.
    pos, neg : ndarray of shape (n, 3)
        Positive triples and their corruptions (same relation).

    Returns
    -------
    losses : ndarray of shape (n,)
    grad_ent, grad_rel : ndarray
        Gradients of ``losses.sum()``.
    """
    vp = ent[pos[:, 0]] + rel[pos[:, 1]] - ent[pos[:, 2]]
    vn = ent[neg[:, 0]] + rel[neg[:, 1]] - ent[neg[:, 2]]
    if norm == "L1":
        dp, dn = np.abs(vp).sum(1), np.abs(vn).sum(1)
    else:
        dp, dn = np.sqrt((vp * vp).sum(1)), np.sqrt((vn * vn).sum(1))
    losses = np.maximum(0.0, margin + dp - dn)
    active = losses > 0
    gp = _distance_grad(vp[active], norm)
    gn = _distance_grad(vn[active], norm)
    grad_ent = np.zeros_like(ent)
    grad_rel = np.zeros_like(rel)
    pa, na = pos[active], neg[active]
    np.add.at(grad_ent, pa[:, 0], gp)
    np.add.at(grad_ent, pa[:, 2], -gp)
    np.add.at(grad_ent, na[:, 0], -gn)
    np.add.at(grad_ent, na[:, 2], gn)
    np.add.at(grad_rel, pa[:, 1], gp - gn)
    return losses, grad_ent, grad_rel


class TransE:
    """Translational embedding model trained with margin ranking loss and SGD."""

    def __init__(self, n_entities: int, n_relations: int, cfg: TransEConfig = TransEConfig()):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        bound = 6.0 / math.sqrt(cfg.dim)
        self.entities = self.rng.uniform(-bound, bound, size=(n_entities, cfg.dim))
        self.relations = self.rng.uniform(-bound, bound, size=(n_relations, cfg.dim))
        _normalize_rows(self.relations)
        _normalize_rows(self.entities)
        self.loss_history: list[float] = []

    def corrupt(self, triples: np.ndarray) -> np.ndarray:
        """Replace head or tail (uniformly) of each triple by another entity."""
        n = self.entities.shape[0]
        neg = np.repeat(triples, self.cfg.negatives, axis=0)
        side = np.where(self.rng.random(len(neg)) < 0.5, 0, 2)
        repl = self.rng.integers(0, n - 1, size=len(neg))
        rows = np.arange(len(neg))
        orig = neg[rows, side]
        neg[rows, side] = repl + (repl >= orig)
        return neg

    def mean_loss(self, pos, neg) -> float:
        pos = np.repeat(pos, self.cfg.negatives, axis=0)
        losses, _, _ = margin_loss_and_grads(self.entities, self.relations, pos, neg, self.cfg.margin, self.cfg.norm)
        return float(losses.mean())

    def fit(self, triples: np.ndarray, callback=None) -> "TransE":
        """Train on merged-id triples.

        ``callback(epoch, model)``, if given, runs after every epoch once the
        entity vectors have been renormalized.
        """
        cfg = self.cfg
        triples = np.asarray(triples, dtype=np.int64)
        if len(triples) == 0:
            raise TrainingError("embedding requires relational structure (no relation triples)")
        if self.entities.shape[0] < 2:
            raise TrainingError("embedding requires at least two entities")
        for epoch in range(1, cfg.epochs + 1):
            order = self.rng.permutation(len(triples))
            pos_all = np.repeat(triples[order], cfg.negatives, axis=0)
            neg_all = self.corrupt(triples[order])
            if epoch == 1:
                self.loss_history.append(self.mean_loss(triples[order], neg_all))
            total = 0.0
            for start in range(0, len(pos_all), cfg.batch_size):
                pos = pos_all[start : start + cfg.batch_size]
                neg = neg_all[start : start + cfg.batch_size]
                losses, g_ent, g_rel = margin_loss_and_grads(
                    self.entities, self.relations, pos, neg, cfg.margin, cfg.norm
                )
                total += float(losses.sum())
                self.entities -= cfg.learning_rate * g_ent
                self.relations -= cfg.learning_rate * g_rel
            _normalize_rows(self.entities)
            mean = total / len(pos_all)
            if not math.isfinite(mean):
                raise TrainingError(f"TransE loss became non-finite at epoch {epoch}")
            self.loss_history.append(mean)
            if callback is not None:
                callback(epoch, self)
        return self


def train_transe(merged: MergedGraph, cfg: TransEConfig = TransEConfig(), callback=None) -> EmbeddingTable:
    """Fit TransE on a merged graph and key the vectors back to both graphs.

    Seed-fused entities share one vector.  ``loss_history[0]`` is the mean
    margin loss at initialization, ``loss_history[e]`` the mean loss seen
    during epoch ``e``.
    """
    if len(merged.triples) == 0:
        raise TrainingError("embedding requires relational structure (no relation triples)")
    model = TransE(merged.n_entities, merged.n_relations, cfg)
    model.fit(merged.triples, callback)
    ent = model.entities
    return EmbeddingTable(ent[merged.map1], ent[merged.map2], model.loss_history)


def embed_fold(kg1, kg2, train_links: AlignmentSet, cfg: TransEConfig = TransEConfig()) -> EmbeddingTable:
    """Fuse the training links only, then train."""
    return train_transe(merge_graphs(kg1, kg2, train_links), cfg)


# -- embedding files ----------------------------------------------------------------


def save_embeddings(path, table: EmbeddingTable, kg1: KnowledgeGraph, kg2: KnowledgeGraph) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"dim={table.dim}\n")
        for idx, kg in ((1, kg1), (2, kg2)):
            m = table.matrix(idx)
            for e in range(kg.n_entities):
                vec = " ".join(repr(float(x)) for x in m[e])
                fh.write(f"{idx}\t{escape_field(kg.entity_iri(e))}\t{vec}\n")


def load_embeddings(path, kg1: KnowledgeGraph, kg2: KnowledgeGraph) -> EmbeddingTable:
    """Read an embedding file; every entity of both graphs must be covered."""
    path = Path(path)
    kgs = {1: kg1, 2: kg2}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("dim="):
            raise InputError(f"{path}:1: expected 'dim=<d>' header, got {header!r}")
        try:
            dim = int(header[4:])
        except ValueError:
            raise InputError(f"{path}:1: bad dimension in header {header!r}") from None
        if dim < 1:
            raise InputError(f"{path}:1: dimension must be positive")
        mats = {i: np.full((kg.n_entities, dim), np.nan) for i, kg in kgs.items()}
        seen = {1: np.zeros(kg1.n_entities, bool), 2: np.zeros(kg2.n_entities, bool)}
        unknown = []
        for lineno, line in enumerate(fh, 2):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise InputError(f"{path}:{lineno}: expected 3 TAB-separated fields, got {len(fields)}")
            idx_s, iri, values = fields
            if idx_s not in ("1", "2"):
                raise InputError(f"{path}:{lineno}: kg_index must be 1 or 2, got {idx_s!r}")
            idx = int(idx_s)
            try:
                vec = [float(x) for x in values.split()]
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-numeric vector entry") from None
            if len(vec) != dim:
                raise InputError(f"{path}:{lineno}: expected {dim} values, got {len(vec)}")
            iri = unescape_field(iri)
            e = kgs[idx].entity_id(iri)
            if e is None:
                unknown.append(f"{idx}:{iri}")
                continue
            if seen[idx][e]:
                raise InputError(f"{path}:{lineno}: duplicate vector for {iri!r}")
            seen[idx][e] = True
            mats[idx][e] = vec
    if unknown:
        raise InputError(f"{path}: entities not present in the graphs: {', '.join(unknown)}")
    missing = [f"{i}:{kgs[i].entity_iri(int(e))}" for i in (1, 2) for e in np.flatnonzero(~seen[i])]
    if missing:
        raise InputError(f"{path}: no vector for entities: {', '.join(missing)}")
    return EmbeddingTable(mats[1], mats[2])


# -- pair features and retrieval -------------------------------------------------------


def pair_embedding_features(table: EmbeddingTable, e1, e2, mode: str = "concat") -> np.ndarray:
    if mode not in PAIR_MODES:
        raise ValueError(f"unknown pair mode {mode!r}; expected one of {PAIR_MODES}")
    try:
        a, b = table[e1], table[e2]
    except KeyError as exc:
        raise InputError(str(exc)) from None
    if mode == "concat":
        return np.concatenate([a, b])
    if mode == "diff":
        return a - b
    return a * b


def pair_feature_matrix(table: EmbeddingTable, pairs, mode: str = "concat") -> np.ndarray:
    """Vectorized :func:`pair_embedding_features` for ``(EntityRef, EntityRef)`` rows."""
    if mode not in PAIR_MODES:
        raise ValueError(f"unknown pair mode {mode!r}; expected one of {PAIR_MODES}")
    width = 2 * table.dim if mode == "concat" else table.dim
    if len(pairs) == 0:
        return np.zeros((0, width))
    idx = np.array([(p[0][0], p[0][1], p[1][0], p[1][1]) for p in pairs], dtype=np.int64)
    left = np.empty((len(idx), table.dim))
    right = np.empty((len(idx), table.dim))
    for k in (1, 2):
        m = table.matrix(k)
        for col, out in ((0, left), (2, right)):
            sel = idx[:, col] == k
            ids = idx[sel, col + 1]
            if ids.size and (ids.min() < 0 or ids.max() >= m.shape[0]):
                raise InputError(f"pair references entity without embedding in KG{k}")
            out[sel] = m[ids]
    if mode == "concat":
        return np.hstack([left, right])
    if mode == "diff":
        return left - right
    return left * right


def nn_hits(table: EmbeddingTable, eval_links: AlignmentSet, k: int = 1, chunk: int = 1024) -> float:
    """Fraction of eval pairs whose KG2 entity is among the ``k`` nearest
    KG2 neighbours (Euclidean, exhaustive) of the KG1 entity.

    A pair counts as a hit when fewer than ``k`` KG2 entities are strictly
    closer than the gold counterpart.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pairs = np.array(eval_links.sorted_pairs(), dtype=np.int64).reshape(-1, 2)
    if len(pairs) == 0:
        raise InputError("nn_hits needs a nonempty evaluation set")
    cand = table.vectors2
    cand_sq = (cand * cand).sum(1)
    hits = 0
    for start in range(0, len(pairs), chunk):
        block = pairs[start : start + chunk]
        q = table.vectors1[block[:, 0]]
        d = cand_sq[None, :] - 2.0 * q @ cand.T
        gold = d[np.arange(len(block)), block[:, 1]]
        closer = (d < gold[:, None]).sum(1)
        hits += int((closer < k).sum())
    return hits / len(pairs)
