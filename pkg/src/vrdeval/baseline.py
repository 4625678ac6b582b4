"""Deterministic heuristic SER tagger and EL linker.

This exists so the full transform/predict/score pipeline runs without a
neural model; its scores are golden snapshots, not quality claims. Rules,
in order of precedence per segment: text ending in a colon is a question;
a segment whose vertical center sits in the top header band is a header; a
segment whose nearest left neighbor on the same row, or nearest neighbor
above it, is a colon-question becomes an answer; anything else is other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Document, Entity, RelationTriplet, box_union


@dataclass(frozen=True)
class BaselineConfig:
    header_band: float = 0.10
    link_max_distance: float | None = None  # None: page diagonal

    def __post_init__(self) -> None:
        if not 0 < self.header_band <= 1:
            raise ValueError("header_band must be in (0, 1]")


def _same_row(a, b) -> bool:
    overlap = min(a.y1, b.y1) - max(a.y0, b.y0)
    return overlap >= 0.5 * min(a.height, b.height)


def tag_ser(doc: Document, config: BaselineConfig | None = None) -> tuple[Entity, ...]:
    """One predicted entity per segment, covering the segment's words."""
    config = config or BaselineConfig()
    boxes = [seg.box for seg in doc.segments]
    is_question = [
        " ".join(doc.words[i].text for i in seg.word_indices).rstrip().endswith(":")
        for seg in doc.segments
    ]

    def left_neighbor(si: int) -> int | None:
        best, best_x1 = None, -math.inf
        for ti, tbox in enumerate(boxes):
            if ti == si or not _same_row(tbox, boxes[si]) or tbox.x1 > boxes[si].x0:
                continue
            if tbox.x1 > best_x1:
                best, best_x1 = ti, tbox.x1
        return best

    def above_neighbor(si: int) -> int | None:
        sbox = boxes[si]
        best, best_y1 = None, -math.inf
        for ti, tbox in enumerate(boxes):
            if ti == si or tbox.y1 > sbox.y0:
                continue
            if tbox.x0 < sbox.x1 and sbox.x0 < tbox.x1 and tbox.y1 > best_y1:
                best, best_y1 = ti, tbox.y1
        return best

    entities = []
    band = config.header_band * doc.height
    for si, seg in enumerate(doc.segments):
        if is_question[si]:
            etype = "question"
        elif seg.box.center[1] < band:
            etype = "header"
        else:
            left, above = left_neighbor(si), above_neighbor(si)
            if (left is not None and is_question[left]) or (
                above is not None and is_question[above]
            ):
                etype = "answer"
            else:
                etype = "other"
        start, end = seg.span
        entities.append(Entity(etype, start, end))
    return tuple(entities)


def link_el(doc: Document, entities: tuple[Entity, ...] | None = None,
            config: BaselineConfig | None = None) -> tuple[RelationTriplet, ...]:
    """Link each answer entity to the nearest question above or to its left."""
    config = config or BaselineConfig()
    if entities is None:
        entities = doc.entities
    max_dist = config.link_max_distance
    if max_dist is None:
        max_dist = math.hypot(doc.width, doc.height)

    centers = [
        box_union(doc.words[i].box for i in range(ent.start, ent.end)).center
        for ent in entities
    ]

    triplets = []
    for ai, ent in enumerate(entities):
        if ent.etype != "answer":
            continue
        ax, ay = centers[ai]
        best: tuple[float, int] | None = None
        for qi, cand in enumerate(entities):
            if cand.etype != "question" or qi == ai:
                continue
            qx, qy = centers[qi]
            if not (qy <= ay or qx <= ax):
                continue
            dist = math.hypot(qx - ax, qy - ay)
            if dist <= max_dist and (best is None or (dist, qi) < best):
                best = (dist, qi)
        if best is not None:
            triplets.append(RelationTriplet("link", best[1], ai))
    return tuple(triplets)
