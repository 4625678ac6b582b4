"""Entity-level SER scoring, relation-triplet EL scoring, and BIO codecs.

Matching is exact: a predicted entity counts iff its (type, start, end)
equals a gold entity's; a predicted triplet counts iff its (type, subject,
object) equals a gold triplet's. Matching is one-to-one, so duplicated
predictions score at most once. Aggregation is micro: counts are pooled
over all documents before computing fractions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .codec import PredictionSet
from .core import Document, Entity


class ScoringError(ValueError):
    """Predictions cannot be scored against the given gold documents."""


@dataclass(frozen=True)
class PRF:
    """Micro precision/recall/F1 with the raw counts they derive from.

    Conventions: precision is 0 when nothing was predicted, recall is 0
    when there is no gold, F1 is 0 when precision + recall is 0.
    """

    tp: int
    predicted: int
    gold: int

    @property
    def precision(self) -> float:
        return self.tp / self.predicted if self.predicted else 0.0

    @property
    def recall(self) -> float:
        return self.tp / self.gold if self.gold else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other: PRF) -> PRF:
        return PRF(self.tp + other.tp, self.predicted + other.predicted, self.gold + other.gold)


@dataclass(frozen=True)
class SubsetRecall:
    """Recall restricted to a gold-entity subset; 0 by convention when the
    subset is empty (flagged)."""

    recalled: int
    subset_size: int

    @property
    def recall(self) -> float:
        return self.recalled / self.subset_size if self.subset_size else 0.0

    @property
    def empty_subset(self) -> bool:
        return self.subset_size == 0


# ---------------------------------------------------------------------------
# BIO tagging


def _split_tag(tag: str, labels: Sequence[str] | None) -> tuple[str, str]:
    if tag == "O":
        return "O", ""
    if len(tag) > 2 and tag[1] == "-" and tag[0] in "BI":
        label = tag[2:]
        if labels is not None and label not in labels:
            raise ScoringError(f"unknown label in tag {tag!r}")
        return tag[0], label
    raise ScoringError(f"malformed tag {tag!r}")


def decode_bio(tags: Sequence[str], labels: Sequence[str] | None = None) -> tuple[Entity, ...]:
    """Decode a BIO sequence into half-open spans.

    B-X opens a span; I-X extends an open span of the same type; an I-X with
    no compatible open span opens a new one (repair rule); O closes.
    """
    spans: list[Entity] = []
    open_type: str | None = None
    start = 0
    for i, tag in enumerate(tags):
        marker, label = _split_tag(tag, labels)
        if marker == "O":
            if open_type is not None:
                spans.append(Entity(open_type, start, i))
                open_type = None
        elif marker == "B" or label != open_type:
            if open_type is not None:
                spans.append(Entity(open_type, start, i))
            open_type, start = label, i
    if open_type is not None:
        spans.append(Entity(open_type, start, len(tags)))
    return tuple(spans)


def encode_bio(spans: Iterable[Entity], word_count: int) -> tuple[str, ...]:
    """Inverse of decode_bio on disjoint spans; positions outside spans are O."""
    tags = ["O"] * word_count
    for ent in spans:
        if not (0 <= ent.start < ent.end <= word_count):
            raise ScoringError(f"span [{ent.start}, {ent.end}) not within [0, {word_count})")
        for i in range(ent.start, ent.end):
            if tags[i] != "O":
                raise ScoringError(f"overlapping span at word {i}")
            tags[i] = ("B-" if i == ent.start else "I-") + ent.etype
    return tuple(tags)


# ---------------------------------------------------------------------------
# Scoring


def predicted_entities(record, labels: Sequence[str] | None = None) -> tuple[Entity, ...]:
    """Spans of a SER prediction record, decoding tags when necessary."""
    if record.tags is not None:
        return decode_bio(record.tags, labels)
    return record.entities or ()


def _match_count(predicted: Iterable, gold: Iterable) -> int:
    """One-to-one exact matches between two multisets."""
    pred_counts = Counter(predicted)
    gold_counts = Counter(gold)
    return sum(min(c, gold_counts[k]) for k, c in pred_counts.items())


def _check_ids(preds: PredictionSet, docs_by_id: Mapping[str, Document]) -> None:
    for doc_id in preds.records:
        if doc_id not in docs_by_id:
            raise ScoringError(f"prediction references unknown document {doc_id!r}")


def ser_prf(docs: Sequence[Document], preds: PredictionSet,
            labels: Sequence[str] | None = None) -> PRF:
    """Micro entity PRF over a split. Documents without a prediction record
    count as having no predictions."""
    if preds.task != "ser":
        raise ScoringError(f"expected a SER prediction set, got task {preds.task!r}")
    by_id = {d.id: d for d in docs}
    _check_ids(preds, by_id)
    total = PRF(0, 0, 0)
    for doc in docs:
        rec = preds.records.get(doc.id)
        pred = predicted_entities(rec, labels) if rec is not None else ()
        gold = [(e.etype, e.start, e.end) for e in doc.entities]
        keys = [(e.etype, e.start, e.end) for e in pred]
        total += PRF(_match_count(keys, gold), len(keys), len(gold))
    return total


def subset_recall(docs: Sequence[Document], preds: PredictionSet,
                  subset: Mapping[str, Sequence[int]],
                  labels: Sequence[str] | None = None) -> SubsetRecall:
    """Recall counting only the gold entities named by ``subset`` (a map of
    document id to entity indices)."""
    if preds.task != "ser":
        raise ScoringError(f"expected a SER prediction set, got task {preds.task!r}")
    by_id = {d.id: d for d in docs}
    _check_ids(preds, by_id)
    recalled = size = 0
    for doc_id, indices in subset.items():
        doc = by_id.get(doc_id)
        if doc is None:
            raise ScoringError(f"subset references unknown document {doc_id!r}")
        rec = preds.records.get(doc_id)
        pred_keys = (
            {(e.etype, e.start, e.end) for e in predicted_entities(rec, labels)}
            if rec is not None
            else set()
        )
        for ei in indices:
            if not 0 <= ei < len(doc.entities):
                raise ScoringError(f"subset index {ei} out of range for document {doc_id!r}")
            ent = doc.entities[ei]
            size += 1
            recalled += (ent.etype, ent.start, ent.end) in pred_keys
    return SubsetRecall(recalled, size)


def el_prf(docs: Sequence[Document], preds: PredictionSet) -> PRF:
    """Micro triplet PRF over a split, direction- and type-sensitive, with
    predictions referencing gold entity indices."""
    if preds.task != "el":
        raise ScoringError(f"expected an EL prediction set, got task {preds.task!r}")
    by_id = {d.id: d for d in docs}
    _check_ids(preds, by_id)
    total = PRF(0, 0, 0)
    for doc in docs:
        rec = preds.records.get(doc.id)
        pred = rec.relations if rec is not None else ()
        n_ent = len(doc.entities)
        for r in pred:
            if not (0 <= r.subject < n_ent and 0 <= r.object < n_ent):
                raise ScoringError(
                    f"{doc.id}: relation ({r.subject}, {r.object}) outside gold entities"
                )
        keys = [(r.rtype, r.subject, r.object) for r in pred]
        gold = [(r.rtype, r.subject, r.object) for r in doc.relations]
        total += PRF(_match_count(keys, gold), len(keys), len(gold))
    return total
