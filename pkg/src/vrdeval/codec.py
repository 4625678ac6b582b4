"""Canonical dataset and prediction file formats, plus the FUNSD importer.

Canonical files are UTF-8 JSON with LF line endings, two-space indentation,
keys in a fixed order, and integral coordinates written without a decimal
point. One dataset file holds one split. Serialization is byte-deterministic
and ``parse(serialize(d)) == d`` for every valid value.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .core import (
    ALL_SPLIT,
    BoundingBox,
    Dataset,
    Document,
    Entity,
    RelationTriplet,
    Segment,
    Violation,
    Word,
    validate_dataset,
)

logger = logging.getLogger(__name__)

FUNSD_LABELS = ("question", "answer", "header", "other")
FUNSD_ENTITY_LABELS = ("question", "answer", "header")
RELATION_DIRECTION_RULES = ("question-to-answer", "file-order")

_TAG_RE = re.compile(r"^(O|[BI]-.+)$")


class CodecError(Exception):
    """Base class for file-format failures."""


class ParseError(CodecError):
    """Input is not syntactically valid JSON."""


class SchemaError(CodecError):
    """Input is valid JSON but not the canonical shape."""


class InvariantError(CodecError):
    """Input parses but violates model invariants."""

    def __init__(self, message: str, violations: Sequence[tuple[str, Violation]] = ()) -> None:
        lines = [message] + [f"  {doc_id}: {v}" for doc_id, v in violations]
        super().__init__("\n".join(lines))
        self.violations = list(violations)


# ---------------------------------------------------------------------------
# Canonical JSON encoding


def _num(x: float | int) -> float | int:
    """Integral values render as unpadded integers; others keep full precision."""
    if isinstance(x, int):
        return x
    if math.isfinite(x) and x == int(x):
        return int(x)
    return x


def _box_json(box: BoundingBox) -> list:
    return [_num(box.x0), _num(box.y0), _num(box.x1), _num(box.y1)]


def _doc_json(doc: Document) -> dict:
    return {
        "id": doc.id,
        "width": doc.width,
        "height": doc.height,
        "words": [{"text": w.text, "box": _box_json(w.box)} for w in doc.words],
        "segments": [
            {"words": list(s.word_indices), "box": _box_json(s.box)} for s in doc.segments
        ],
        "entities": [{"type": e.etype, "start": e.start, "end": e.end} for e in doc.entities],
        "relations": [
            {"type": r.rtype, "subject": r.subject, "object": r.object} for r in doc.relations
        ],
    }


def canonical_json_bytes(obj: dict) -> bytes:
    """Byte-deterministic JSON: two-space indent, UTF-8, LF, trailing newline,
    keys in insertion order."""
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def serialize_dataset(dataset: Dataset) -> bytes:
    """Canonical bytes for a single-split dataset."""
    if len(dataset.splits) != 1:
        raise ValueError(
            f"canonical dataset files hold exactly one split, got {sorted(dataset.splits)}"
        )
    docs = next(iter(dataset.splits.values()))
    obj: dict[str, Any] = {
        "name": dataset.name,
        "labels": list(dataset.label_set),
        "relation_labels": list(dataset.relation_label_set),
    }
    if dataset.provenance is not None:
        obj["provenance"] = dataset.provenance
    obj["documents"] = [_doc_json(d) for d in docs]
    return canonical_json_bytes(obj)


# ---------------------------------------------------------------------------
# Canonical JSON decoding

_EXPECTED_TOP = ("name", "labels", "relation_labels", "provenance", "documents")
_EXPECTED_DOC = ("id", "width", "height", "words", "segments", "entities", "relations")


def _require(cond: bool, where: str, message: str) -> None:
    if not cond:
        raise SchemaError(f"{where}: {message}")


def _check_keys(obj: dict, allowed: Sequence[str], required: Sequence[str], where: str) -> None:
    _require(isinstance(obj, dict), where, "expected an object")
    for key in obj:
        _require(key in allowed, where, f"unexpected key {key!r}")
    for key in required:
        _require(key in obj, where, f"missing key {key!r}")


def _str_list(value: Any, where: str) -> tuple[str, ...]:
    _require(isinstance(value, list), where, "expected an array of strings")
    for i, item in enumerate(value):
        _require(isinstance(item, str), f"{where}[{i}]", "expected a string")
    return tuple(value)


def _coord(value: Any, where: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), where, "expected a number")
    return float(value)


def _int(value: Any, where: str) -> int:
    _require(isinstance(value, int) and not isinstance(value, bool), where, "expected an integer")
    return value


def _parse_box(value: Any, where: str) -> BoundingBox:
    _require(isinstance(value, list) and len(value) == 4, where, "expected [x0, y0, x1, y1]")
    return BoundingBox(*(_coord(v, f"{where}[{i}]") for i, v in enumerate(value)))


def _parse_doc(obj: Any, where: str) -> Document:
    _check_keys(obj, _EXPECTED_DOC, _EXPECTED_DOC, where)
    _require(isinstance(obj["id"], str), f"{where}.id", "expected a string")
    words = []
    _require(isinstance(obj["words"], list), f"{where}.words", "expected an array")
    for i, w in enumerate(obj["words"]):
        loc = f"{where}.words[{i}]"
        _check_keys(w, ("text", "box"), ("text", "box"), loc)
        _require(isinstance(w["text"], str), f"{loc}.text", "expected a string")
        words.append(Word(w["text"], _parse_box(w["box"], f"{loc}.box")))
    segments = []
    _require(isinstance(obj["segments"], list), f"{where}.segments", "expected an array")
    for i, s in enumerate(obj["segments"]):
        loc = f"{where}.segments[{i}]"
        _check_keys(s, ("words", "box"), ("words", "box"), loc)
        _require(isinstance(s["words"], list), f"{loc}.words", "expected an array")
        indices = tuple(_int(v, f"{loc}.words[{j}]") for j, v in enumerate(s["words"]))
        segments.append(Segment(indices, _parse_box(s["box"], f"{loc}.box")))
    entities = []
    _require(isinstance(obj["entities"], list), f"{where}.entities", "expected an array")
    for i, e in enumerate(obj["entities"]):
        loc = f"{where}.entities[{i}]"
        _check_keys(e, ("type", "start", "end"), ("type", "start", "end"), loc)
        _require(isinstance(e["type"], str), f"{loc}.type", "expected a string")
        entities.append(Entity(e["type"], _int(e["start"], f"{loc}.start"), _int(e["end"], f"{loc}.end")))
    relations = []
    _require(isinstance(obj["relations"], list), f"{where}.relations", "expected an array")
    for i, r in enumerate(obj["relations"]):
        loc = f"{where}.relations[{i}]"
        _check_keys(r, ("type", "subject", "object"), ("type", "subject", "object"), loc)
        _require(isinstance(r["type"], str), f"{loc}.type", "expected a string")
        relations.append(
            RelationTriplet(
                r["type"], _int(r["subject"], f"{loc}.subject"), _int(r["object"], f"{loc}.object")
            )
        )
    return Document(
        id=obj["id"],
        width=_int(obj["width"], f"{where}.width"),
        height=_int(obj["height"], f"{where}.height"),
        words=tuple(words),
        segments=tuple(segments),
        entities=tuple(entities),
        relations=tuple(relations),
    )


def _loads(data: bytes | str, where: str) -> Any:
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}: {exc}") from exc


def parse_dataset(path: str | Path, split: str = ALL_SPLIT, validate: bool = True) -> Dataset:
    """Parse one canonical dataset file into a single-split dataset."""
    path = Path(path)
    obj = _loads(path.read_bytes(), str(path))
    _check_keys(obj, _EXPECTED_TOP, ("name", "labels", "relation_labels", "documents"), "top level")
    _require(isinstance(obj["name"], str), "top level.name", "expected a string")
    provenance = obj.get("provenance")
    if provenance is not None:
        _require(isinstance(provenance, dict), "top level.provenance", "expected an object")
    _require(isinstance(obj["documents"], list), "top level.documents", "expected an array")
    docs = tuple(
        _parse_doc(d, f"documents[{i}]") for i, d in enumerate(obj["documents"])
    )
    dataset = Dataset(
        name=obj["name"],
        label_set=_str_list(obj["labels"], "top level.labels"),
        relation_label_set=_str_list(obj["relation_labels"], "top level.relation_labels"),
        splits={split: docs},
        provenance=provenance,
    )
    if validate:
        violations = validate_dataset(dataset)
        if violations:
            raise InvariantError(f"{path}: dataset violates model invariants", violations)
    return dataset


def load_dataset(path: str | Path, validate: bool = True) -> Dataset:
    """Load a canonical file (single split named "all") or a directory of
    canonical files (one split per file, named by file stem)."""
    path = Path(path)
    if path.is_file():
        return parse_dataset(path, validate=validate)
    if not path.is_dir():
        raise FileNotFoundError(f"{path}: no such file or directory")
    files = sorted(path.glob("*.json"))
    if not files:
        raise SchemaError(f"{path}: no canonical .json files found")
    parts = [(f.stem, parse_dataset(f, split=f.stem, validate=validate)) for f in files]
    name, labels, rlabels = (
        parts[0][1].name,
        parts[0][1].label_set,
        parts[0][1].relation_label_set,
    )
    for stem, part in parts[1:]:
        if (part.name, part.label_set, part.relation_label_set) != (name, labels, rlabels):
            raise SchemaError(f"{path}: split file {stem!r} disagrees on name or label sets")
    return Dataset(
        name=name,
        label_set=labels,
        relation_label_set=rlabels,
        splits={stem: part.splits[stem] for stem, part in parts},
    )


def write_dataset(dataset: Dataset, out: str | Path) -> list[Path]:
    """Write one canonical file per split. A lone split goes to ``out`` when
    it names a .json file, otherwise files are ``out/<split>.json``."""
    out = Path(out)
    if len(dataset.splits) == 1 and out.suffix == ".json":
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(serialize_dataset(dataset))
        return [out]
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for split, docs in dataset.splits.items():
        part = Dataset(dataset.name, dataset.label_set, dataset.relation_label_set,
                       {split: docs}, dataset.provenance)
        target = out / f"{split}.json"
        target.write_bytes(serialize_dataset(part))
        written.append(target)
    return written


# ---------------------------------------------------------------------------
# Predictions


@dataclass(frozen=True)
class PredictionRecord:
    """Model output for one document: spans or BIO tags (SER), triplets (EL)."""

    doc_id: str
    entities: tuple[Entity, ...] | None = None
    tags: tuple[str, ...] | None = None
    relations: tuple[RelationTriplet, ...] = ()


@dataclass(frozen=True)
class PredictionSet:
    """Per-document predictions for one task, keyed by document id."""

    task: str
    records: dict[str, PredictionRecord]


def serialize_predictions(preds: PredictionSet) -> bytes:
    docs = []
    for rec in preds.records.values():
        entry: dict[str, Any] = {"id": rec.doc_id}
        if preds.task == "ser":
            if rec.tags is not None:
                entry["tags"] = list(rec.tags)
            else:
                entry["entities"] = [
                    {"type": e.etype, "start": e.start, "end": e.end} for e in rec.entities or ()
                ]
        else:
            entry["relations"] = [
                {"type": r.rtype, "subject": r.subject, "object": r.object}
                for r in rec.relations
            ]
        docs.append(entry)
    return canonical_json_bytes({"task": preds.task, "documents": docs})


def parse_predictions(path: str | Path) -> PredictionSet:
    """Parse a canonical prediction file. Schema and duplicate checks only;
    use :func:`bind_predictions` to validate against the evaluated split."""
    path = Path(path)
    obj = _loads(path.read_bytes(), str(path))
    _check_keys(obj, ("task", "documents"), ("task", "documents"), "top level")
    task = obj["task"]
    _require(task in ("ser", "el"), "top level.task", f"expected 'ser' or 'el', got {task!r}")
    _require(isinstance(obj["documents"], list), "top level.documents", "expected an array")

    records: dict[str, PredictionRecord] = {}
    for i, d in enumerate(obj["documents"]):
        where = f"documents[{i}]"
        if task == "ser":
            _check_keys(d, ("id", "entities", "tags"), ("id",), where)
            _require(("entities" in d) != ("tags" in d), where, "need exactly one of entities/tags")
        else:
            _check_keys(d, ("id", "relations"), ("id", "relations"), where)
        _require(isinstance(d["id"], str), f"{where}.id", "expected a string")
        if d["id"] in records:
            raise InvariantError(
                f"{path}: duplicate document id",
                [(d["id"], Violation("duplicate-id", where, "document listed twice"))],
            )
        entities = tags = None
        relations: tuple[RelationTriplet, ...] = ()
        if task == "ser" and "entities" in d:
            entities = []
            for j, e in enumerate(d["entities"]):
                loc = f"{where}.entities[{j}]"
                _check_keys(e, ("type", "start", "end"), ("type", "start", "end"), loc)
                entities.append(
                    Entity(e["type"], _int(e["start"], f"{loc}.start"), _int(e["end"], f"{loc}.end"))
                )
            entities = tuple(entities)
        if task == "ser" and "tags" in d:
            tags = _str_list(d["tags"], f"{where}.tags")
            for j, tag in enumerate(tags):
                _require(bool(_TAG_RE.match(tag)), f"{where}.tags[{j}]",
                         f"{tag!r} is not O, B-<label>, or I-<label>")
        if task == "el":
            rels = []
            seen: set[tuple[int, int]] = set()
            for j, r in enumerate(d["relations"]):
                loc = f"{where}.relations[{j}]"
                _check_keys(r, ("type", "subject", "object"), ("type", "subject", "object"), loc)
                pair = (_int(r["subject"], f"{loc}.subject"), _int(r["object"], f"{loc}.object"))
                if pair in seen:
                    raise InvariantError(
                        f"{path}: duplicate relation",
                        [(d["id"], Violation("duplicate-relation", loc, f"pair {pair} listed twice"))],
                    )
                seen.add(pair)
                rels.append(RelationTriplet(r["type"], *pair))
            relations = tuple(rels)
        records[d["id"]] = PredictionRecord(d["id"], entities, tags, relations)
    return PredictionSet(task=task, records=records)


def bind_predictions(preds: PredictionSet, dataset: Dataset, split: str) -> list[Violation]:
    """Check a prediction set against the split it will be scored on.

    Verifies document ids exist, tag sequences have the document's word
    count, labels belong to the declared label sets, spans stay in range,
    and EL endpoints index the gold entity list.
    """
    docs = {d.id: d for d in dataset.split_docs(split)}
    labels = set(dataset.label_set)
    out: list[Violation] = []
    for doc_id, rec in preds.records.items():
        doc = docs.get(doc_id)
        if doc is None:
            out.append(Violation("unknown-document", doc_id, f"id {doc_id!r} not in split {split!r}"))
            continue
        if rec.tags is not None:
            if len(rec.tags) != doc.word_count:
                out.append(
                    Violation(
                        "tag-length",
                        doc_id,
                        f"{len(rec.tags)} tags for {doc.word_count} words",
                    )
                )
            for j, tag in enumerate(rec.tags):
                if tag != "O" and tag[2:] not in labels:
                    out.append(Violation("unknown-label", f"{doc_id}.tags[{j}]", f"{tag!r}"))
        for j, ent in enumerate(rec.entities or ()):
            if ent.etype not in labels:
                out.append(Violation("unknown-label", f"{doc_id}.entities[{j}]", f"{ent.etype!r}"))
            if not (0 <= ent.start < ent.end <= doc.word_count):
                out.append(
                    Violation(
                        "entity-span",
                        f"{doc_id}.entities[{j}]",
                        f"span [{ent.start}, {ent.end}) not within [0, {doc.word_count})",
                    )
                )
        for j, rel in enumerate(rec.relations):
            if rel.rtype not in dataset.relation_label_set:
                out.append(Violation("unknown-label", f"{doc_id}.relations[{j}]", f"{rel.rtype!r}"))
            n_ent = len(doc.entities)
            if not (0 <= rel.subject < n_ent and 0 <= rel.object < n_ent):
                out.append(
                    Violation(
                        "relation-endpoints",
                        f"{doc_id}.relations[{j}]",
                        f"({rel.subject}, {rel.object}) outside gold entities [0, {n_ent})",
                    )
                )
    return out


# ---------------------------------------------------------------------------
# FUNSD import


@dataclass(frozen=True)
class ImportOptions:
    drop_invalid_links: bool = True
    relation_direction: str = "question-to-answer"

    def __post_init__(self) -> None:
        if self.relation_direction not in RELATION_DIRECTION_RULES:
            raise ValueError(
                f"unknown relation_direction {self.relation_direction!r}; "
                f"expected one of {RELATION_DIRECTION_RULES}"
            )


@dataclass(frozen=True)
class _Block:
    block_id: int
    label: str
    word_range: tuple[int, int] | None  # None when dropped (no words)
    entity_index: int | None


def _import_doc(path: Path, options: ImportOptions) -> Document:
    obj = _loads(path.read_bytes(), str(path))
    _require(isinstance(obj, dict) and "form" in obj, str(path), "expected an object with 'form'")
    _require(isinstance(obj["form"], list), f"{path}:form", "expected an array")

    words: list[Word] = []
    segments: list[Segment] = []
    entities: list[Entity] = []
    blocks: dict[int, _Block] = {}
    raw_links: list[tuple[int, int]] = []

    for bi, block in enumerate(obj["form"]):
        where = f"{path.name}:form[{bi}]"
        _require(isinstance(block, dict), where, "expected an object")
        for key in ("box", "text", "label", "words", "linking", "id"):
            _require(key in block, where, f"missing key {key!r}")
        label = block["label"]
        _require(label in FUNSD_LABELS, where, f"unknown label {label!r}")
        block_id = _int(block["id"], f"{where}.id")
        _require(block_id not in blocks, where, f"duplicate block id {block_id}")

        kept = [
            w for w in block["words"]
            if isinstance(w, dict) and isinstance(w.get("text"), str) and w["text"].strip()
        ]
        for pair in block["linking"]:
            _require(isinstance(pair, list) and len(pair) == 2, f"{where}.linking", "expected [from, to]")
            raw_links.append((_int(pair[0], f"{where}.linking"), _int(pair[1], f"{where}.linking")))

        if not kept:
            logger.warning("%s: block %d (%r) has no words after cleanup; dropped",
                           path.name, block_id, label)
            blocks[block_id] = _Block(block_id, label, None, None)
            continue

        start = len(words)
        for w in kept:
            words.append(Word(w["text"], _parse_box(w["box"], f"{where}.words.box")))
        end = len(words)

        # Expand the block box just enough to contain member word centers;
        # release boxes occasionally miss a word by a pixel or two.
        box = _parse_box(block["box"], f"{where}.box")
        for wi in range(start, end):
            cx, cy = words[wi].box.center
            box = box.union(BoundingBox(cx, cy, cx, cy))
        segments.append(Segment(tuple(range(start, end)), box))

        entity_index = None
        if label in FUNSD_ENTITY_LABELS:
            entity_index = len(entities)
            entities.append(Entity(label, start, end))
        blocks[block_id] = _Block(block_id, label, (start, end), entity_index)

    pairs: set[tuple[int, int]] = set()
    invalid: list[tuple[int, int]] = []
    for a, b in raw_links:
        blk_a, blk_b = blocks.get(a), blocks.get(b)
        usable = (
            blk_a is not None and blk_b is not None
            and blk_a.entity_index is not None and blk_b.entity_index is not None
            and a != b
        )
        if not usable:
            invalid.append((a, b))
            continue
        if options.relation_direction == "question-to-answer" and (
            (blk_a.label == "question") != (blk_b.label == "question")
        ):
            subj, obj_ = (blk_a, blk_b) if blk_a.label == "question" else (blk_b, blk_a)
        else:
            subj, obj_ = blk_a, blk_b
        pairs.add((subj.entity_index, obj_.entity_index))

    if invalid and not options.drop_invalid_links:
        raise InvariantError(
            f"{path}: invalid linking pairs {sorted(set(invalid))} (missing, empty, or "
            "non-entity blocks)"
        )

    relations = tuple(RelationTriplet("link", s, o) for s, o in sorted(pairs))
    max_x = max((w.box.x1 for w in words), default=0.0)
    max_y = max((w.box.y1 for w in words), default=0.0)
    for seg in segments:
        max_x, max_y = max(max_x, seg.box.x1), max(max_y, seg.box.y1)
    return Document(
        id=path.stem,
        width=max(1, math.ceil(max_x)),
        height=max(1, math.ceil(max_y)),
        words=tuple(words),
        segments=tuple(segments),
        entities=tuple(entities),
        relations=relations,
    )


def import_funsd(directory: str | Path, options: ImportOptions | None = None) -> Dataset:
    """Import a FUNSD-style annotation directory.

    Accepts the released layout (``training_data/annotations`` plus
    ``testing_data/annotations`` become the train/test splits), a bare
    ``annotations`` directory, or a flat directory of annotation files.
    Page size is the tight hull of the annotation boxes; the release ships
    no page dimensions and image decoding is out of scope here.
    """
    options = options or ImportOptions()
    directory = Path(directory)
    name = directory.name
    if (directory / "dataset" / "training_data").is_dir():
        directory = directory / "dataset"  # the public zip wraps everything once
    if (directory / "training_data").is_dir() or (directory / "testing_data").is_dir():
        sources = [
            (split, directory / sub / "annotations")
            for split, sub in (("train", "training_data"), ("test", "testing_data"))
            if (directory / sub / "annotations").is_dir()
        ]
    elif (directory / "annotations").is_dir():
        sources = [(ALL_SPLIT, directory / "annotations")]
    else:
        sources = [(ALL_SPLIT, directory)]

    splits: dict[str, tuple[Document, ...]] = {}
    for split, src in sources:
        files = sorted(src.glob("*.json"))
        if not files:
            raise SchemaError(f"{src}: no annotation files found")
        splits[split] = tuple(_import_doc(f, options) for f in files)

    dataset = Dataset(
        name=name,
        label_set=FUNSD_LABELS,
        relation_label_set=("link",),
        splits=splits,
    )
    violations = validate_dataset(dataset)
    if violations:
        raise InvariantError(f"{directory}: imported dataset is invalid", violations)
    return dataset
