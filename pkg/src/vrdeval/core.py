"""Entity-centric document model: words, segments, entities, relations.

Coordinates are page pixels with the origin at the top-left corner, x
growing right and y growing down. Entity spans are half-open word-index
intervals [start, end). All values are immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

ALL_SPLIT = "all"


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned rectangle in page pixel coordinates."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self) -> None:
        for name in ("x0", "y0", "x1", "y1"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)

    def contains_point(self, x: float, y: float) -> bool:
        """Inclusive containment test."""
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def union(self, other: BoundingBox) -> BoundingBox:
        return BoundingBox(
            min(self.x0, other.x0),
            min(self.y0, other.y0),
            max(self.x1, other.x1),
            max(self.y1, other.y1),
        )

    def is_valid(self) -> bool:
        coords = (self.x0, self.y0, self.x1, self.y1)
        return all(math.isfinite(c) for c in coords) and self.x0 <= self.x1 and self.y0 <= self.y1


def box_union(boxes: Iterable[BoundingBox]) -> BoundingBox:
    """Smallest box enclosing every input box. Raises on an empty iterable."""
    it = iter(boxes)
    try:
        out = next(it)
    except StopIteration:
        raise ValueError("box_union of no boxes") from None
    for b in it:
        out = out.union(b)
    return out


@dataclass(frozen=True)
class Word:
    text: str
    box: BoundingBox


@dataclass(frozen=True)
class Segment:
    """A text-line region grouping word indices, with its own box."""

    word_indices: tuple[int, ...]
    box: BoundingBox

    def __post_init__(self) -> None:
        object.__setattr__(self, "word_indices", tuple(int(i) for i in self.word_indices))

    @property
    def span(self) -> tuple[int, int]:
        """Half-open word-index span from first to last member."""
        return (self.word_indices[0], self.word_indices[-1] + 1)


@dataclass(frozen=True)
class Entity:
    """A typed continuous word span, half-open [start, end)."""

    etype: str
    start: int
    end: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "end", int(self.end))

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class RelationTriplet:
    """Typed directed link between two entity indices (subject -> object)."""

    rtype: str
    subject: int
    object: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "subject", int(self.subject))
        object.__setattr__(self, "object", int(self.object))


@dataclass(frozen=True)
class Document:
    """One page: words with boxes, segment grouping, gold entities and relations."""

    id: str
    width: int
    height: int
    words: tuple[Word, ...]
    segments: tuple[Segment, ...]
    entities: tuple[Entity, ...]
    relations: tuple[RelationTriplet, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "words", tuple(self.words))
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "entities", tuple(self.entities))
        object.__setattr__(self, "relations", tuple(self.relations))

    @property
    def word_count(self) -> int:
        return len(self.words)

    def word_to_segment(self) -> dict[int, int]:
        """Map word index -> segment index (first claiming segment wins)."""
        out: dict[int, int] = {}
        for si, seg in enumerate(self.segments):
            for wi in seg.word_indices:
                out.setdefault(wi, si)
        return out

    def word_to_entity(self) -> dict[int, int]:
        """Map word index -> entity index for words inside an entity span."""
        out: dict[int, int] = {}
        for ei, ent in enumerate(self.entities):
            for wi in range(ent.start, ent.end):
                out.setdefault(wi, ei)
        return out


@dataclass(frozen=True)
class Dataset:
    """Named splits of documents plus the declared label sets."""

    name: str
    label_set: tuple[str, ...]
    relation_label_set: tuple[str, ...]
    splits: dict[str, tuple[Document, ...]]
    provenance: dict | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "label_set", tuple(self.label_set))
        object.__setattr__(self, "relation_label_set", tuple(self.relation_label_set))
        object.__setattr__(
            self, "splits", {k: tuple(v) for k, v in self.splits.items()}
        )

    def split_docs(self, split: str) -> tuple[Document, ...]:
        """Documents of a split. The reserved name "all" is the union of every
        split in insertion order (unless a split is literally named "all")."""
        if split in self.splits:
            return self.splits[split]
        if split == ALL_SPLIT:
            out: list[Document] = []
            for docs in self.splits.values():
                out.extend(docs)
            return tuple(out)
        raise KeyError(f"unknown split {split!r}; have {sorted(self.splits)}")


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Violation:
    rule: str
    location: str
    message: str

    def __str__(self) -> str:
        return f"[{self.rule}] {self.location}: {self.message}"


def validate_document(
    doc: Document,
    labels: Sequence[str] | None = None,
    relation_labels: Sequence[str] | None = None,
) -> list[Violation]:
    """Check every structural invariant; returns all violations, never only
    the first. Label-set membership is checked only when label sets are given.
    """
    out: list[Violation] = []
    n = doc.word_count

    for i, word in enumerate(doc.words):
        if not word.text:
            out.append(Violation("word-text", f"word[{i}]", "empty text"))
        if not word.box.is_valid():
            out.append(Violation("box-geometry", f"word[{i}]", f"invalid box {word.box}"))

    covered: dict[int, list[int]] = {}
    for si, seg in enumerate(doc.segments):
        loc = f"segment[{si}]"
        if not seg.box.is_valid():
            out.append(Violation("box-geometry", loc, f"invalid box {seg.box}"))
        if not seg.word_indices:
            out.append(Violation("segment-members", loc, "no member words"))
            continue
        if any(b <= a for a, b in zip(seg.word_indices, seg.word_indices[1:])):
            out.append(Violation("segment-members", loc, "word indices not strictly increasing"))
        for wi in seg.word_indices:
            if 0 <= wi < n:
                covered.setdefault(wi, []).append(si)
            else:
                out.append(Violation("segment-members", loc, f"word index {wi} out of range"))
        if seg.box.is_valid():
            for wi in seg.word_indices:
                if not 0 <= wi < n or not doc.words[wi].box.is_valid():
                    continue
                cx, cy = doc.words[wi].box.center
                if not seg.box.contains_point(cx, cy):
                    out.append(
                        Violation(
                            "segment-box-center",
                            loc,
                            f"word[{wi}] center ({cx:g}, {cy:g}) outside segment box",
                        )
                    )

    for wi in range(n):
        owners = covered.get(wi, [])
        if not owners:
            out.append(Violation("segment-partition", f"word[{wi}]", "belongs to no segment"))
        elif len(owners) > 1:
            out.append(
                Violation(
                    "segment-partition",
                    f"word[{wi}]",
                    f"belongs to segments {owners}",
                )
            )

    for ei, ent in enumerate(doc.entities):
        loc = f"entity[{ei}]"
        if not (0 <= ent.start < ent.end <= n):
            out.append(
                Violation("entity-span", loc, f"span [{ent.start}, {ent.end}) not within [0, {n})")
            )
        if labels is not None and ent.etype not in labels:
            out.append(Violation("entity-type", loc, f"unknown type {ent.etype!r}"))

    spans = sorted(
        (ent.start, ent.end, ei)
        for ei, ent in enumerate(doc.entities)
        if ent.start < ent.end
    )
    for (s0, e0, i0), (s1, e1, i1) in zip(spans, spans[1:]):
        if s1 < e0:
            out.append(
                Violation(
                    "entity-overlap",
                    f"entity[{i0}]/entity[{i1}]",
                    f"spans [{s0},{e0}) and [{s1},{e1}) overlap",
                )
            )

    seen_pairs: set[tuple[int, int]] = set()
    n_ent = len(doc.entities)
    for ri, rel in enumerate(doc.relations):
        loc = f"relation[{ri}]"
        if not (0 <= rel.subject < n_ent and 0 <= rel.object < n_ent):
            out.append(
                Violation("relation-endpoints", loc, f"({rel.subject}, {rel.object}) out of range")
            )
            continue
        if rel.subject == rel.object:
            out.append(Violation("relation-self", loc, f"self link on entity {rel.subject}"))
        pair = (rel.subject, rel.object)
        if pair in seen_pairs:
            out.append(Violation("duplicate-relation", loc, f"duplicate pair {pair}"))
        seen_pairs.add(pair)
        if relation_labels is not None and rel.rtype not in relation_labels:
            out.append(Violation("relation-type", loc, f"unknown type {rel.rtype!r}"))

    return out


def validate_dataset(dataset: Dataset) -> list[tuple[str, Violation]]:
    """Validate every document in every split, plus id uniqueness per split.

    Returns (document id, violation) pairs; split-level problems use the
    split name as the id.
    """
    out: list[tuple[str, Violation]] = []
    for split, docs in dataset.splits.items():
        seen: set[str] = set()
        for doc in docs:
            if doc.id in seen:
                out.append(
                    (split, Violation("duplicate-id", f"split[{split}]", f"duplicate id {doc.id!r}"))
                )
            seen.add(doc.id)
            for v in validate_document(doc, dataset.label_set, dataset.relation_label_set):
                out.append((doc.id, v))
    return out


# ---------------------------------------------------------------------------
# Geometry helpers


def entity_box(doc: Document, entity_index: int) -> BoundingBox:
    """Axis-aligned union of the member words' boxes."""
    if not 0 <= entity_index < len(doc.entities):
        raise IndexError(f"entity index {entity_index} out of range")
    ent = doc.entities[entity_index]
    if not (0 <= ent.start < ent.end <= doc.word_count):
        raise IndexError(f"entity[{entity_index}] span invalid for {doc.word_count} words")
    return box_union(doc.words[i].box for i in range(ent.start, ent.end))


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def row_clusters(doc: Document) -> list[int]:
    """Assign each word a row id.

    Two words share a row iff their vertical intervals overlap by at least
    50% of the smaller interval's height, closed transitively. Row ids are
    ordered by ascending mean y-center of the cluster.
    """
    n = doc.word_count
    if n == 0:
        return []
    y0 = np.array([w.box.y0 for w in doc.words])
    y1 = np.array([w.box.y1 for w in doc.words])
    overlap = np.minimum.outer(y1, y1) - np.maximum.outer(y0, y0)
    smaller = np.minimum.outer(y1 - y0, y1 - y0)
    same = overlap >= 0.5 * smaller

    uf = _UnionFind(n)
    for i, j in np.argwhere(np.triu(same, k=1)):
        uf.union(int(i), int(j))

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    centers = (y0 + y1) / 2.0
    ordered = sorted(groups.values(), key=lambda ws: (float(np.mean(centers[ws])), ws[0]))
    assign = [0] * n
    for row_id, members in enumerate(ordered):
        for i in members:
            assign[i] = row_id
    return assign


# ---------------------------------------------------------------------------
# Statistics


@dataclass(frozen=True)
class StatsReport:
    """Counts plus per-sample averages (averages rounded to 2 decimals)."""

    dataset: str
    split: str
    samples: int
    segments: int
    words: int
    entities: int
    relations: int
    complex_entities: int
    segments_per_sample: float
    words_per_sample: float
    entities_per_sample: float
    relations_per_sample: float
    avg_segment_len: float
    avg_entity_len: float
    complex_proportion: float


def _avg(num: float, den: float) -> float:
    return round(num / den, 2) if den else 0.0


def dataset_stats(dataset: Dataset, split: str) -> StatsReport:
    """Aggregate counts over one split ("all" for the union of splits)."""
    docs = dataset.split_docs(split)
    from .analysis import is_complex  # deferred: analysis builds on this module

    samples = len(docs)
    segments = sum(len(d.segments) for d in docs)
    words = sum(d.word_count for d in docs)
    entities = sum(len(d.entities) for d in docs)
    relations = sum(len(d.relations) for d in docs)
    entity_words = sum(len(e) for d in docs for e in d.entities)
    complex_entities = 0
    for doc in docs:
        rows = row_clusters(doc)
        complex_entities += sum(
            1 for ei in range(len(doc.entities)) if is_complex(doc, ei, rows=rows)
        )

    return StatsReport(
        dataset=dataset.name,
        split=split,
        samples=samples,
        segments=segments,
        words=words,
        entities=entities,
        relations=relations,
        complex_entities=complex_entities,
        segments_per_sample=_avg(segments, samples),
        words_per_sample=_avg(words, samples),
        entities_per_sample=_avg(entities, samples),
        relations_per_sample=_avg(relations, samples),
        avg_segment_len=_avg(words, segments),
        avg_entity_len=_avg(entity_words, entities),
        complex_proportion=(complex_entities / entities) if entities else 0.0,
    )
