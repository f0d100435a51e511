"""Run configuration and the five-fold experiment driver.

A run is described by one JSON document::

    {
      "dataset": "path/to/openea_dir",
      "variant": "A" | "E" | "A||E",
      "embedding": {"source": "train"} | {"source": "file", "path": "emb_{fold}.txt"},
      "pair_mode": "concat" | "diff" | "hadamard",
      "classifier": "rf" | "mlp",
      "seed": 0,
      "output": "out_dir",
      "negative_ratio": 1.0,
      "gjac_matcher": "greedy" | "optimal",
      "folds": [1, 2, 3, 4, 5],
      "transe": {...}, "rf": {...}, "mlp": {...}
    }

Only ``dataset`` is required; ``embedding`` is required unless the variant is
``A``.  Relative paths resolve against the config file's directory.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import __version__
from .classifiers import MLPConfig, RandomForestConfig, predict, train_mlp, train_rf
from .dataset import AttributeFeaturizer, assemble_features, canonical_variant, sample_negatives
from .embedding import PAIR_MODES, TransEConfig, embed_fold, load_embeddings
from .errors import InputError
from .evaluation import PRF, per_type_prf, prf
from .ingest import N_FOLDS, TYPE_ATTRIBUTE, load_openea_dataset
from .similarity import ProfileIndex

_SECTIONS = {"transe": TransEConfig, "rf": RandomForestConfig, "mlp": MLPConfig}
_TOP_KEYS = {
    "dataset", "variant", "embedding", "pair_mode", "classifier", "seed", "output",
    "negative_ratio", "gjac_matcher", "folds", *_SECTIONS,
}
_SEED_NAMES = ("transe", "train_negatives", "validation_negatives", "test_negatives", "classifier")


def version_string() -> str:
    return f"v{__version__}"


def _expect(cond: bool, msg: str) -> None:
    if not cond:
        raise InputError(f"invalid run config: {msg}")


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


@dataclass(frozen=True)
class RunConfig:
    dataset: str
    variant: str = "A||E"
    embedding: Mapping[str, Any] | None = None
    pair_mode: str = "concat"
    classifier: str = "rf"
    seed: int = 0
    output: str | None = None
    negative_ratio: float = 1.0
    gjac_matcher: str = "greedy"
    folds: tuple = (1, 2, 3, 4, 5)
    transe: TransEConfig = field(default_factory=TransEConfig)
    rf: RandomForestConfig = field(default_factory=RandomForestConfig)
    mlp: MLPConfig = field(default_factory=MLPConfig)
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d: Mapping, base_dir=".") -> "RunConfig":
        _expect(isinstance(d, Mapping), "top level must be a JSON object")
        unknown = sorted(set(d) - _TOP_KEYS)
        _expect(not unknown, f"unknown keys {unknown}")
        _expect(isinstance(d.get("dataset"), str) and d["dataset"], "'dataset' (a directory path) is required")
        variant = canonical_variant(str(d.get("variant", "A||E")))
        emb = d.get("embedding")
        if emb is not None:
            _expect(isinstance(emb, Mapping), "'embedding' must be an object")
            src = emb.get("source")
            _expect(src in ("train", "file"), "'embedding.source' must be 'train' or 'file'")
            if src == "file":
                _expect(isinstance(emb.get("path"), str), "'embedding.path' is required for source 'file'")
            _expect(set(emb) <= {"source", "path"}, "'embedding' accepts only 'source' and 'path'")
        _expect(variant == "A" or emb is not None, f"variant {variant} needs an 'embedding' source")
        pair_mode = d.get("pair_mode", "concat")
        _expect(pair_mode in PAIR_MODES, f"'pair_mode' must be one of {PAIR_MODES}")
        clf = d.get("classifier", "rf")
        _expect(clf in ("rf", "mlp"), "'classifier' must be 'rf' or 'mlp'")
        seed = d.get("seed", 0)
        _expect(_is_int(seed) and 0 <= seed < 2**64, "'seed' must be an unsigned 64-bit integer")
        ratio = d.get("negative_ratio", 1.0)
        _expect(isinstance(ratio, (int, float)) and not isinstance(ratio, bool) and ratio > 0, "'negative_ratio' must be > 0")
        matcher = d.get("gjac_matcher", "greedy")
        _expect(matcher in ("greedy", "optimal"), "'gjac_matcher' must be 'greedy' or 'optimal'")
        folds = d.get("folds", list(range(1, N_FOLDS + 1)))
        _expect(
            isinstance(folds, list) and folds and all(_is_int(f) and 1 <= f <= N_FOLDS for f in folds)
            and len(set(folds)) == len(folds),
            f"'folds' must be a nonempty list of distinct integers in 1..{N_FOLDS}",
        )
        output = d.get("output")
        _expect(output is None or isinstance(output, str), "'output' must be a path string")
        sections = {}
        for name, klass in _SECTIONS.items():
            sub = d.get(name, {})
            _expect(isinstance(sub, Mapping), f"'{name}' must be an object")
            allowed = set(klass.__dataclass_fields__) - {"seed"}
            bad = sorted(set(sub) - allowed)
            _expect(not bad, f"unknown keys in '{name}': {bad}")
            try:
                sections[name] = klass(**sub)
            except TypeError as exc:
                raise InputError(f"invalid run config: '{name}': {exc}") from None
        return cls(
            dataset=d["dataset"], variant=variant, embedding=dict(emb) if emb else None,
            pair_mode=pair_mode, classifier=clf, seed=int(seed), output=output,
            negative_ratio=float(ratio), gjac_matcher=matcher, folds=tuple(sorted(folds)),
            base_dir=str(base_dir), **sections,
        )

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise InputError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self) -> dict:
        """Canonical form: every default made explicit, module seeds omitted."""
        d = {
            "dataset": self.dataset,
            "variant": self.variant,
            "embedding": self.embedding,
            "pair_mode": self.pair_mode,
            "classifier": self.classifier,
            "seed": self.seed,
            "output": self.output,
            "negative_ratio": self.negative_ratio,
            "gjac_matcher": self.gjac_matcher,
            "folds": list(self.folds),
        }
        for name in _SECTIONS:
            sub = getattr(self, name).to_dict()
            sub.pop("seed", None)
            sub.pop("n_jobs", None)
            d[name] = sub
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def resolve(self, p: str) -> Path:
        q = Path(p)
        return q if q.is_absolute() else Path(self.base_dir) / q


def derive_seed(master: int, fold: int, purpose: str) -> int:
    """Independent 63-bit seed for one (fold, purpose) stream."""
    ss = np.random.SeedSequence([master, fold, _SEED_NAMES.index(purpose)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def fold_seeds(master: int, fold: int) -> dict[str, int]:
    return {name: derive_seed(master, fold, name) for name in _SEED_NAMES}


def _entity_types(kg) -> list:
    """KG1 entity id -> value of its ``type`` attribute (first in sort order) or None."""
    types: list = [None] * kg.n_entities
    for e, a, v in sorted(kg.attr_triples):
        if kg.attribute_iri(a) == TYPE_ATTRIBUTE and types[e] is None:
            types[e] = kg.literal(v)
    return types


def _mean_prf(records: list[PRF]) -> dict:
    return {
        "precision": float(np.mean([r.precision for r in records])),
        "recall": float(np.mean([r.recall for r in records])),
        "f_measure": float(np.mean([r.f_measure for r in records])),
        "f_measure_std": float(np.std([r.f_measure for r in records])),
    }


def run_fold(cfg: RunConfig, bundle, fold_no: int, featurizer, entity_types) -> tuple[dict, dict]:
    """Train and evaluate one fold; returns (metrics record, timings)."""
    seeds = fold_seeds(cfg.seed, fold_no)
    fold = bundle.folds[fold_no - 1]
    kg1, kg2 = bundle.kg1, bundle.kg2
    timings: dict[str, float] = {}
    table = None
    if cfg.variant != "A":
        t = time.perf_counter()
        if cfg.embedding["source"] == "train":
            table = embed_fold(kg1, kg2, fold.train, replace(cfg.transe, seed=seeds["transe"]))
        else:
            table = load_embeddings(cfg.resolve(cfg.embedding["path"].format(fold=fold_no)), kg1, kg2)
        timings["embedding"] = time.perf_counter() - t

    t = time.perf_counter()
    splits = {}
    for split, links in (("train", fold.train), ("validation", fold.validation), ("test", fold.test)):
        pairs = sample_negatives(
            links, kg1, kg2, forbidden=bundle.gold, ratio=cfg.negative_ratio, seed=seeds[f"{split}_negatives"]
        )
        splits[split] = assemble_features(pairs, cfg.variant, featurizer, table, cfg.pair_mode)
    timings["features"] = time.perf_counter() - t

    t = time.perf_counter()
    if cfg.classifier == "rf":
        model = train_rf(splits["train"], cfg=replace(cfg.rf, seed=seeds["classifier"]))
        extra = {}
    else:
        model = train_mlp(splits["train"], validation=splits["validation"], cfg=replace(cfg.mlp, seed=seeds["classifier"]))
        extra = {"epochs_run": model.metadata["epochs_run"], "best_epoch": model.metadata["best_epoch"]}
    timings["training"] = time.perf_counter() - t

    t = time.perf_counter()
    test = splits["test"]
    labels, _ = predict(model, test)
    result = prf(test.y, labels)
    record = {
        "fold": fold_no,
        "seeds": seeds,
        "n_train": len(splits["train"]),
        "n_validation": len(splits["validation"]),
        "n_test": len(test),
        "feature_dim": test.feature_dim,
        "prf": result.as_dict(),
        **extra,
    }
    types = [entity_types[p.e1.id] for p in test.pairs]
    if any(tp is not None for tp in types):
        typed = [i for i, tp in enumerate(types) if tp is not None]
        per = per_type_prf(test.y[typed], labels[typed], [types[i] for i in typed])
        record["per_type"] = {k: v.as_dict() for k, v in per.items()}
    if table is not None and len(table.loss_history):
        record["embedding_loss"] = {"initial": table.loss_history[0], "final": table.loss_history[-1]}
    timings["evaluation"] = time.perf_counter() - t
    return record, timings


def run_experiment(cfg: RunConfig, n_jobs: int | None = None) -> tuple[dict, dict]:
    """Run every configured fold.

    Returns
    -------
    metrics : dict
        Deterministic for a fixed config: per-fold records, the mean over
        folds and provenance.
    timings : dict
        Wall-clock seconds per fold and phase (not deterministic).
    """
    if n_jobs is not None:
        cfg = replace(cfg, rf=replace(cfg.rf, n_jobs=max(1, int(n_jobs))))
    t0 = time.perf_counter()
    bundle = load_openea_dataset(cfg.resolve(cfg.dataset), seed=cfg.seed, write_back=False)
    load_time = time.perf_counter() - t0
    featurizer = AttributeFeaturizer(ProfileIndex(bundle.kg1, bundle.kg2), cfg.gjac_matcher)
    entity_types = _entity_types(bundle.kg1)
    folds, fold_times = [], {}
    for k in cfg.folds:
        rec, tm = run_fold(cfg, bundle, k, featurizer, entity_types)
        folds.append(rec)
        fold_times[str(k)] = tm
    agg = _mean_prf([PRF(**r["prf"]) for r in folds])
    h = cfg.config_hash()
    metrics = {
        "config_hash": h,
        "version": version_string(),
        "config": cfg.to_dict(),
        "dataset": bundle.stats(),
        "folds_generated": bundle.folds_generated,
        "folds": folds,
        "aggregate": agg,
    }
    timings = {"config_hash": h, "load": load_time, "folds": fold_times, "total": time.perf_counter() - t0}
    return metrics, timings


def dump_json(obj, path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")
    return p
