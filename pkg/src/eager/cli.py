"""Command-line entry point: ``eager <subcommand> ...``.

Subcommands mirror the pipeline stages so an experiment can be scripted step
by step (``split``, ``embed``, ``featurize``, ``train``, ``predict``) or run
in one go (``run``).  ``convert`` turns CSV tables into an OpenEA directory and
``ranktest`` compares methods over datasets.

Exit codes: 0 success, 2 usage or input error, 3 runtime failure.  Errors
are written to stderr as one JSON object ``{"error": {...}}``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import EagerError, InputError

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3
THREADS_ENV = "EAGER_THREADS"


def _u64(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return v


def _alpha(text: str) -> float:
    if text not in ("0.05", "0.10", "0.1"):
        raise argparse.ArgumentTypeError("alpha must be 0.05 or 0.10")
    return float(text)


def _threads() -> int | None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def _step_config(path, **overrides):
    """Module settings for single steps, read from a run config if given."""
    from .pipeline import RunConfig

    data = {}
    if path is not None:
        data = dict(json.loads(Path(path).read_text(encoding="utf-8")))
    data.setdefault("dataset", ".")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if data.get("variant", "A||E") != "A" and "embedding" not in data:
        data["embedding"] = {"source": "train"}
    return RunConfig.from_dict(data, base_dir=Path(path).parent if path else ".")


def _print_json(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


# -- subcommands ---------------------------------------------------------------


def cmd_convert(args) -> int:
    from .ingest import TabularSchema, convert_tables, dataset_files

    out = convert_tables(
        args.csv1, TabularSchema.from_json(args.schema1),
        args.csv2, TabularSchema.from_json(args.schema2),
        args.links, args.out,
    )
    _print_json({"output": str(out), "files": dataset_files(out)})
    return EXIT_OK


def cmd_split(args) -> int:
    from .dataset import split_folds
    from .ingest import FOLD_DIR, load_kg_pair, write_folds

    kg1, kg2, gold = load_kg_pair(args.dataset)
    folds = split_folds(gold, args.seed)
    out = Path(args.out) if args.out else Path(args.dataset)
    write_folds(out, kg1, kg2, folds)
    _print_json({
        "output": str(out / FOLD_DIR),
        "folds": [{"train": len(f.train), "validation": len(f.validation), "test": len(f.test)} for f in folds],
    })
    return EXIT_OK


def cmd_embed(args) -> int:
    from .embedding import embed_fold, save_embeddings
    from .ingest import load_openea_dataset
    from .pipeline import fold_seeds

    cfg = _step_config(args.config)
    bundle = load_openea_dataset(args.dataset, seed=args.seed, write_back=False)
    fold = bundle.folds[args.fold - 1]
    tcfg = replace(cfg.transe, seed=fold_seeds(args.seed, args.fold)["transe"])
    table = embed_fold(bundle.kg1, bundle.kg2, fold.train, tcfg)
    save_embeddings(args.out, table, bundle.kg1, bundle.kg2)
    _print_json({
        "output": args.out,
        "dim": table.dim,
        "loss_initial": table.loss_history[0] if table.loss_history else None,
        "loss_final": table.loss_history[-1] if table.loss_history else None,
    })
    return EXIT_OK


def cmd_featurize(args) -> int:
    from .dataset import AttributeFeaturizer, assemble_features, sample_negatives
    from .embedding import load_embeddings
    from .ingest import load_openea_dataset
    from .pipeline import fold_seeds
    from .similarity import ProfileIndex

    cfg = _step_config(args.config, variant=args.variant, pair_mode=args.mode)
    bundle = load_openea_dataset(args.dataset, seed=args.seed, write_back=False)
    if cfg.variant != "A" and not args.embeddings:
        raise InputError(f"variant {cfg.variant} needs --embeddings")
    table = load_embeddings(args.embeddings, bundle.kg1, bundle.kg2) if cfg.variant != "A" else None
    links = getattr(bundle.folds[args.fold - 1], args.split)
    pairs = sample_negatives(
        links, bundle.kg1, bundle.kg2, forbidden=bundle.gold, ratio=cfg.negative_ratio,
        seed=fold_seeds(args.seed, args.fold)[f"{args.split}_negatives"],
    )
    fm = assemble_features(
        pairs, cfg.variant, AttributeFeaturizer(ProfileIndex(bundle.kg1, bundle.kg2), cfg.gjac_matcher),
        table, cfg.pair_mode,
    )
    fm.to_csv(args.out)
    if args.pairs_out:
        with open(args.pairs_out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, delimiter="\t", lineterminator="\n")
            for p in pairs:
                w.writerow([bundle.kg1.entity_iri(p.e1.id), bundle.kg2.entity_iri(p.e2.id), p.label])
    _print_json({"output": args.out, "rows": len(fm), "feature_dim": fm.feature_dim, "variant": cfg.variant})
    return EXIT_OK


def cmd_train(args) -> int:
    from .classifiers import save_model, train_mlp, train_rf
    from .dataset import FeatureMatrix
    from .pipeline import fold_seeds

    cfg = _step_config(args.config, classifier=args.classifier)
    seed = fold_seeds(args.seed, args.fold)["classifier"] if args.fold else args.seed
    train = FeatureMatrix.from_csv(args.features)
    if cfg.classifier == "rf":
        threads = _threads()
        rcfg = replace(cfg.rf, seed=seed, n_jobs=threads or cfg.rf.n_jobs)
        model = train_rf(train, cfg=rcfg)
    else:
        val = FeatureMatrix.from_csv(args.validation) if args.validation else None
        model = train_mlp(train, validation=val, cfg=replace(cfg.mlp, seed=seed))
    save_model(model, args.out)
    _print_json({"output": args.out, "kind": model.kind, "feature_dim": model.feature_dim})
    return EXIT_OK


def cmd_predict(args) -> int:
    from .classifiers import load_model, predict
    from .dataset import FeatureMatrix
    from .evaluation import prf

    model = load_model(args.model)
    fm = FeatureMatrix.from_csv(args.features)
    labels, scores = predict(model, fm)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["score", "prediction", "label"])
            for s, p, y in zip(scores, labels, fm.y):
                w.writerow([repr(float(s)), int(p), int(y)])
    _print_json({"rows": len(fm), "prf": prf(fm.y, labels).as_dict() if len(fm) else None})
    return EXIT_OK


def cmd_run(args) -> int:
    from .pipeline import RunConfig, dump_json, run_experiment

    cfg = RunConfig.from_json(args.config)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        out = Path(args.out)
    elif cfg.output is not None:
        out = cfg.resolve(cfg.output)
    else:
        raise InputError("no output directory: pass --out or set 'output' in the config")
    metrics, timings = run_experiment(cfg, n_jobs=_threads())
    h = metrics["config_hash"]
    for rec in metrics["folds"]:
        dump_json({"config_hash": h, **rec}, out / "folds" / f"fold_{rec['fold']}.json")
    dump_json(metrics, out / "metrics.json")
    dump_json(timings, out / "timings.json")
    _print_json({"output": str(out), "config_hash": h, "aggregate": metrics["aggregate"]})
    return EXIT_OK


def cmd_ranktest(args) -> int:
    from .evaluation import cd_diagram, rank_report, read_score_csv

    methods, datasets, scores = read_score_csv(args.scores)
    report = rank_report(scores, methods, datasets, alpha=args.alpha, higher_is_better=not args.lower_is_better)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report.to_json(out / "report.json")
    cd_diagram(report.avg_ranks, report.methods, report.cd, out / "cd.svg")
    _print_json({
        "output": str(out),
        "avg_ranks": dict(zip(report.methods, report.avg_ranks)),
        "friedman_p": report.friedman_p,
        "cd": report.cd,
        "groups": report.groups,
    })
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eager", description="Entity resolution across two knowledge graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def seed_arg(sp):
        sp.add_argument("--seed", type=_u64, default=0, help="master seed (default 0)")

    def fold_arg(sp, required=True):
        sp.add_argument("--fold", type=int, choices=range(1, 6), required=required, metavar="{1..5}")

    sp = sub.add_parser("convert", help="CSV tables + schemas -> OpenEA directory")
    sp.add_argument("csv1")
    sp.add_argument("schema1")
    sp.add_argument("csv2")
    sp.add_argument("schema2")
    sp.add_argument("links", help="CSV whose first two columns are matching ids")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("split", help="write the five-fold split of the gold links")
    sp.add_argument("dataset")
    seed_arg(sp)
    sp.add_argument("--out", help="directory receiving 721_5fold (default: the dataset)")
    sp.set_defaults(func=cmd_split)

    sp = sub.add_parser("embed", help="train TransE for one fold and write an embedding file")
    sp.add_argument("dataset")
    fold_arg(sp)
    seed_arg(sp)
    sp.add_argument("--config", help="run config whose 'transe' section is used")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("featurize", help="sample pairs for one fold split and write features as CSV")
    sp.add_argument("dataset")
    fold_arg(sp)
    sp.add_argument("--split", choices=("train", "validation", "test"), required=True)
    sp.add_argument("--variant", choices=("A", "E", "A||E"))
    sp.add_argument("--mode", choices=("concat", "diff", "hadamard"))
    sp.add_argument("--embeddings", help="embedding file (variants E and A||E)")
    seed_arg(sp)
    sp.add_argument("--config")
    sp.add_argument("--out", required=True)
    sp.add_argument("--pairs-out", help="also write the sampled pairs as TSV")
    sp.set_defaults(func=cmd_featurize)

    sp = sub.add_parser("train", help="train a classifier on a feature CSV")
    sp.add_argument("features")
    sp.add_argument("--classifier", choices=("rf", "mlp"))
    sp.add_argument("--validation", help="validation feature CSV (mlp early stopping)")
    fold_arg(sp, required=False)
    seed_arg(sp)
    sp.add_argument("--config")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="score a feature CSV with a saved model")
    sp.add_argument("model")
    sp.add_argument("features")
    sp.add_argument("--out", help="CSV of scores and predictions")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("run", help="five-fold experiment from a run config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=_u64, default=None)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("ranktest", help="Friedman/Nemenyi comparison of methods over datasets")
    sp.add_argument("scores", help="CSV: header 'dataset,<methods...>', one row per dataset")
    sp.add_argument("--alpha", type=_alpha, default=0.05)
    sp.add_argument("--lower-is-better", action="store_true")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_ranktest)
    return p


def _error(kind: str, exc: BaseException, code: int) -> int:
    payload = {"error": {"type": kind, "class": type(exc).__name__, "message": str(exc), "exit_code": code}}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage; --help exits 0
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, FileNotFoundError, IsADirectoryError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        return _error("input", exc, EXIT_INPUT)
    except EagerError as exc:
        return _error("runtime", exc, EXIT_RUNTIME)
    except Exception as exc:  # noqa: BLE001 - every failure maps to an exit code
        return _error("runtime", exc, EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
