"""Reading and writing OpenEA-style dataset directories.

Directory layout::

    rel_triples_1   rel_triples_2      head<TAB>relation<TAB>tail
    attr_triples_1  attr_triples_2     entity<TAB>attribute<TAB>value
    ent_links                          kg1 entity<TAB>kg2 entity
    721_5fold/{1..5}/{train_links,valid_links,test_links}

Files are UTF-8, one record per line.  Inside fields a backslash escapes TAB
(``\\t``), newline (``\\n``) and itself (``\\\\``); any other backslash is kept
verbatim so raw OpenEA dumps read unchanged.

Tabular benchmarks (CSV + JSON schema) are converted into shallow graphs with
:func:`tabular_to_kg`.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InputError, ParseError
from .kg import AlignmentSet, Fold, KnowledgeGraph, check_fold_partition, kg_stats

log = logging.getLogger(__name__)

N_FOLDS = 5
FOLD_DIR = "721_5fold"
FOLD_FILES = {"train": "train_links", "validation": "valid_links", "test": "test_links"}
MANDATORY_FILES = ("rel_triples_1", "rel_triples_2", "attr_triples_1", "attr_triples_2", "ent_links")
TYPE_ATTRIBUTE = "type"

_ESCAPE = re.compile(r"\\([\\tn])")
_UNESCAPED = {"\\": "\\", "t": "\t", "n": "\n"}


def unescape_field(s: str) -> str:
    if "\\" not in s:
        return s
    return _ESCAPE.sub(lambda m: _UNESCAPED[m.group(1)], s)


def escape_field(s: str) -> str:
    return s.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def _records(path, n_fields):
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != n_fields:
                raise ParseError(f"expected {n_fields} TAB-separated fields, got {len(fields)}", lineno, str(path))
            yield lineno, [unescape_field(f) for f in fields]


def parse_triple_file(path, kind: str) -> list[tuple[str, str, str]]:
    """Read a relation or attribute triple file as a list of string triples."""
    if kind not in ("relation", "attribute"):
        raise ValueError(f"kind must be 'relation' or 'attribute', not {kind!r}")
    triples = []
    for lineno, (s, p, o) in _records(path, 3):
        if not s.strip() or not p.strip() or (kind == "relation" and not o.strip()):
            raise ParseError("empty identifier field", lineno, str(path))
        triples.append((s, p, o))
    return triples


def parse_link_pairs(path) -> list[tuple[str, str]]:
    """Read a link file as IRI pairs, duplicates removed, first-seen order kept."""
    seen = {}
    for lineno, (a, b) in _records(path, 2):
        if not a.strip() or not b.strip():
            raise ParseError("empty identifier field", lineno, str(path))
        seen.setdefault((a, b), None)
    return list(seen)


def parse_links(path, kg1: KnowledgeGraph | None = None, kg2: KnowledgeGraph | None = None, role: str = "gold"):
    """Parse a link file.

    With both graphs given, the result is an :class:`AlignmentSet` of entity
    ids (unknown IRIs are an error).  Without graphs the IRI pairs themselves
    are returned as a set.
    """
    pairs = parse_link_pairs(path)
    if kg1 is None or kg2 is None:
        return set(pairs)
    return AlignmentSet.from_iris(kg1, kg2, pairs, role)


def write_triple_file(path, triples: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in triples:
            fh.write("\t".join(escape_field(x) for x in t) + "\n")


write_links = write_triple_file


def build_kg(rel_triples, attr_triples, name="kg") -> KnowledgeGraph:
    kg = KnowledgeGraph(name)
    for h, r, t in rel_triples:
        kg.add_relation_triple(h, r, t)
    for e, a, v in attr_triples:
        kg.add_attribute_triple(e, a, v)
    return kg


@dataclass
class DatasetBundle:
    kg1: KnowledgeGraph
    kg2: KnowledgeGraph
    gold: AlignmentSet
    folds: list[Fold]
    path: Path | None = None
    folds_generated: bool = False

    def __post_init__(self):
        if len(self.folds) != N_FOLDS:
            raise InputError(f"expected {N_FOLDS} folds, got {len(self.folds)}")
        for i, fold in enumerate(self.folds, 1):
            try:
                check_fold_partition(self.gold, fold)
            except InputError as exc:
                raise InputError(f"fold {i}: {exc}") from None

    def stats(self) -> dict:
        return {
            "kg1": kg_stats(self.kg1).as_dict(),
            "kg2": kg_stats(self.kg2).as_dict(),
            "gold": len(self.gold),
        }


def _require(directory: Path, name: str) -> Path:
    p = directory / name
    if not p.is_file():
        raise FileNotFoundError(f"dataset {directory} is missing mandatory file {name!r}")
    return p


def load_kg_pair(directory) -> tuple[KnowledgeGraph, KnowledgeGraph, AlignmentSet]:
    d = Path(directory)
    if not d.is_dir():
        raise FileNotFoundError(f"dataset directory {d} does not exist")
    paths = {name: _require(d, name) for name in MANDATORY_FILES}
    kgs = []
    for i in (1, 2):
        kg = build_kg(
            parse_triple_file(paths[f"rel_triples_{i}"], "relation"),
            parse_triple_file(paths[f"attr_triples_{i}"], "attribute"),
            name=f"{d.name}/kg{i}",
        )
        kgs.append(kg.seal())
    gold = parse_links(paths["ent_links"], kgs[0], kgs[1], "gold")
    return kgs[0], kgs[1], gold


def read_folds(directory, kg1, kg2) -> list[Fold] | None:
    """Folds stored under ``721_5fold``; None if the directory is absent."""
    root = Path(directory) / FOLD_DIR
    if not root.is_dir():
        return None
    folds = []
    for i in range(1, N_FOLDS + 1):
        parts = {}
        for role, fname in FOLD_FILES.items():
            p = root / str(i) / fname
            if not p.is_file():
                raise FileNotFoundError(f"fold directory is missing {FOLD_DIR}/{i}/{fname}")
            parts[role] = parse_links(p, kg1, kg2, role)
        folds.append(Fold(**parts))
    return folds


def write_folds(directory, kg1, kg2, folds: Sequence[Fold]) -> None:
    root = Path(directory) / FOLD_DIR
    for i, fold in enumerate(folds, 1):
        sub = root / str(i)
        sub.mkdir(parents=True, exist_ok=True)
        for role, fname in FOLD_FILES.items():
            write_links(sub / fname, getattr(fold, role).to_iris(kg1, kg2))


def load_openea_dataset(directory, seed: int = 0, write_back: bool = True) -> DatasetBundle:
    """Load an OpenEA dataset directory into a :class:`DatasetBundle`.

    Folds are read from ``721_5fold`` when present and must partition the gold
    links.  Otherwise they are generated from ``seed`` and, unless
    ``write_back`` is false, written to disk.
    """
    from .dataset import split_folds

    d = Path(directory)
    kg1, kg2, gold = load_kg_pair(d)
    folds = read_folds(d, kg1, kg2)
    generated = folds is None
    if generated:
        folds = split_folds(gold, seed)
        if write_back:
            write_folds(d, kg1, kg2, folds)
            log.info("wrote generated folds to %s", d / FOLD_DIR)
    return DatasetBundle(kg1, kg2, gold, folds, path=d, folds_generated=generated)


def save_openea_dataset(directory, kg1, kg2, gold: AlignmentSet, folds=None, manifest: bool = True) -> Path:
    """Write two graphs and their links in the OpenEA layout."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for i, kg in ((1, kg1), (2, kg2)):
        write_triple_file(d / f"rel_triples_{i}", kg.relation_triples_iri())
        write_triple_file(d / f"attr_triples_{i}", kg.attribute_triples_iri())
    write_links(d / "ent_links", gold.to_iris(kg1, kg2))
    if folds is not None:
        write_folds(d, kg1, kg2, folds)
    if manifest:
        write_manifest(d, kg1, kg2, gold)
    return d


def write_manifest(directory, kg1, kg2, gold) -> None:
    data = {
        "kg1": kg_stats(kg1).as_dict(),
        "kg2": kg_stats(kg2).as_dict(),
        "gold": len(gold),
    }
    with open(Path(directory) / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(directory) -> dict | None:
    p = Path(directory) / "manifest.json"
    if not p.is_file():
        return None
    with open(p, encoding="utf-8") as fh:
        return json.load(fh)


# -- tabular conversion ------------------------------------------------------


@dataclass
class TabularSchema:
    id_column: str
    entity_type: str
    attribute_columns: list[str] = field(default_factory=list)
    relation_columns: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        self.attribute_columns = list(self.attribute_columns)
        self.relation_columns = [tuple(rc) for rc in self.relation_columns]
        if not self.id_column:
            raise InputError("schema id_column is empty")
        if not str(self.entity_type).strip():
            raise InputError("schema entity_type is empty")
        used = set(self.attribute_columns) | {c for c, _ in self.relation_columns}
        if self.id_column in used:
            raise InputError(f"id column {self.id_column!r} is also listed as attribute/relation column")

    @classmethod
    def from_dict(cls, data: Mapping) -> "TabularSchema":
        missing = [k for k in ("id_column", "entity_type") if k not in data]
        if missing:
            raise InputError(f"schema is missing keys: {', '.join(missing)}")
        rels = []
        for rc in data.get("relation_columns", []):
            if isinstance(rc, Mapping):
                rels.append((rc["column"], rc["target_type"]))
            else:
                col, target = rc
                rels.append((col, target))
        return cls(
            id_column=data["id_column"],
            entity_type=data["entity_type"],
            attribute_columns=list(data.get("attribute_columns", [])),
            relation_columns=rels,
        )

    @classmethod
    def from_json(cls, path) -> "TabularSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def entity_iri(entity_type: str, ident: str) -> str:
    return f"{entity_type}/{ident}"


def tabular_to_kg(rows: Iterable[Mapping[str, str]], schema: TabularSchema, kg: KnowledgeGraph | None = None) -> KnowledgeGraph:
    """Convert table rows into a shallow knowledge graph.

    Each row becomes entity ``<entity_type>/<id>`` with one attribute triple
    per nonempty attribute cell, one relation triple per nonempty relation
    cell (the target ``<target_type>/<cell>`` is created on demand) and a
    ``type`` attribute holding the entity type.  Cells are single literals;
    multi-valued cells are not split.
    """
    kg = kg if kg is not None else KnowledgeGraph(schema.entity_type)
    seen = set()
    for rowno, row in enumerate(rows, 1):
        if schema.id_column not in row:
            raise InputError(f"row {rowno} has no id column {schema.id_column!r}")
        ident = (row[schema.id_column] or "").strip()
        if not ident:
            raise InputError(f"row {rowno} has an empty id in column {schema.id_column!r}")
        if ident in seen:
            raise InputError(f"duplicate id {ident!r} in column {schema.id_column!r} (row {rowno})")
        seen.add(ident)
        subject = entity_iri(schema.entity_type, ident)
        kg.intern(subject)
        for col in schema.attribute_columns:
            value = row.get(col)
            if value is not None and value.strip():
                kg.add_attribute_triple(subject, col, value.strip())
        for col, target_type in schema.relation_columns:
            value = row.get(col)
            if value is not None and value.strip():
                kg.add_relation_triple(subject, col, entity_iri(target_type, value.strip()))
        kg.add_attribute_triple(subject, TYPE_ATTRIBUTE, schema.entity_type)
    return kg


def read_csv_rows(path) -> tuple[list[str], list[dict]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
        return list(reader.fieldnames or []), rows


def convert_tables(csv1, schema1: TabularSchema, csv2, schema2: TabularSchema, links_csv, out_dir) -> Path:
    """Convert two CSV tables plus a link table into an OpenEA directory.

    The link CSV has a header; its first two columns hold ids of table 1 and
    table 2 rows.  Returns the output directory.
    """
    graphs = []
    for i, (path, schema) in enumerate(((csv1, schema1), (csv2, schema2)), 1):
        header, rows = read_csv_rows(path)
        if schema.id_column not in header:
            raise InputError(f"{path}: id column {schema.id_column!r} not found in CSV header")
        graphs.append(tabular_to_kg(rows, schema, KnowledgeGraph(f"kg{i}")))
    kg1, kg2 = graphs
    header, rows = read_csv_rows(links_csv)
    if len(header) < 2:
        raise InputError(f"{links_csv}: link CSV needs two columns")
    c1, c2 = header[0], header[1]
    iri_pairs = [
        (entity_iri(schema1.entity_type, r[c1].strip()), entity_iri(schema2.entity_type, r[c2].strip()))
        for r in rows
    ]
    gold = AlignmentSet.from_iris(kg1, kg2, iri_pairs, "gold")
    return save_openea_dataset(out_dir, kg1, kg2, gold)


def dataset_files(directory) -> list[str]:
    """Relative paths of all regular files below ``directory``, sorted."""
    d = Path(directory)
    out = []
    for root, _, files in os.walk(d):
        for f in files:
            out.append(str(Path(root, f).relative_to(d)))
    return sorted(out)
