"""Shared builders: hand-sized documents plus a seeded random generator."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from vrdeval.core import (
    BoundingBox,
    Dataset,
    Document,
    Entity,
    RelationTriplet,
    Segment,
    Word,
    box_union,
)

DATA_DIR = Path(__file__).parent / "data"
FUNSD_FIXTURE = DATA_DIR / "funsd_fixture"
GOLDEN_DIR = DATA_DIR / "golden"

# Conventional location for the real public release; tests that need it skip
# when it is absent.
FUNSD_RELEASE = Path(__file__).resolve().parents[1] / "data" / "funsd"

LABELS = ("question", "answer", "header", "other")


def word(text: str, x0: float, y0: float, x1: float, y1: float) -> Word:
    return Word(text, BoundingBox(x0, y0, x1, y1))


def line_doc(
    doc_id: str = "doc",
    texts: tuple[str, ...] = ("alpha", "beta"),
    entities: tuple[Entity, ...] = (),
    relations: tuple[RelationTriplet, ...] = (),
    segment_sizes: tuple[int, ...] | None = None,
) -> Document:
    """Words laid out left to right on one line, grouped into segments of the
    given sizes (default: one segment holding everything)."""
    words = tuple(
        word(t, 10 + 60 * i, 10, 50 + 60 * i, 30) for i, t in enumerate(texts)
    )
    sizes = segment_sizes or (len(words),)
    assert sum(sizes) == len(words)
    segments = []
    at = 0
    for size in sizes:
        members = tuple(range(at, at + size))
        segments.append(Segment(members, box_union(words[i].box for i in members)))
        at += size
    return Document(
        id=doc_id,
        width=800,
        height=600,
        words=words,
        segments=tuple(segments),
        entities=entities,
        relations=relations,
    )


def random_document(rng: random.Random, doc_id: str, max_words: int = 40) -> Document:
    """A valid document with row-based layout, contiguous segments, disjoint
    entity spans, and unique relation pairs."""
    n_words = rng.randint(1, max_words)
    words = []
    x, row = 10.0, 0
    for i in range(n_words):
        w = rng.uniform(20, 80)
        if x + w > 740 or rng.random() < 0.15:
            row += 1
            x = 10.0
        y0 = 12 + 34 * row + rng.uniform(-2, 2)
        words.append(word(f"w{i}", x, y0, x + w, y0 + rng.uniform(14, 22)))
        x += w + rng.uniform(4, 12)

    segments = []
    at = 0
    while at < n_words:
        size = min(rng.randint(1, 6), n_words - at)
        members = tuple(range(at, at + size))
        segments.append(Segment(members, box_union(words[i].box for i in members)))
        at += size

    entities = []
    at = 0
    while at < n_words and len(entities) < 12:
        if rng.random() < 0.6:
            end = min(n_words, at + rng.randint(1, 4))
            entities.append(Entity(rng.choice(LABELS[:3]), at, end))
            at = end
        else:
            at += 1

    relations = []
    seen = set()
    if len(entities) >= 2:
        for _ in range(rng.randint(0, 8)):
            s, o = rng.sample(range(len(entities)), 2)
            if (s, o) not in seen:
                seen.add((s, o))
                relations.append(RelationTriplet("link", s, o))

    return Document(
        id=doc_id,
        width=800,
        height=2000,
        words=tuple(words),
        segments=tuple(segments),
        entities=tuple(entities),
        relations=tuple(relations),
    )


def as_dataset(*docs: Document, name: str = "synthetic", split: str = "all") -> Dataset:
    return Dataset(
        name=name,
        label_set=LABELS,
        relation_label_set=("link",),
        splits={split: tuple(docs)},
    )


@pytest.fixture
def fixture_dataset():
    from vrdeval.codec import import_funsd

    return import_funsd(FUNSD_FIXTURE)
