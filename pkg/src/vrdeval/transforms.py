"""Label-preserving layout transforms.

``mask_segments`` reduces a document to word-level layout only. ``perturb``
chains the three-stage noise recipe: segment splitting with exponential
cutoff lengths, per-segment rotation, and per-region boundary offsets,
followed by box repair. Entities, relations, word texts, and word order are
never touched.

Randomness is explicit. Each document gets its own substream so results are
independent of processing order: substream seed = first 8 bytes
(little-endian) of BLAKE2b-64 over the 8-byte little-endian master seed
followed by the UTF-8 document id; the generator is numpy PCG64. Draw order
per document: one exponential draw per emitted chunk (stage 1, segments in
index order); one rotation angle per segment (stage 2, index order); then
per region sigma followed by (dx0, dy0, dx1, dy1), segment boxes before
word boxes, each in index order (stage 3).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from .core import BoundingBox, Document, Segment, box_union

MAX_SEED = 2**64


@dataclass(frozen=True)
class PerturbParams:
    """Noise parameters: exponential rate for splitting, rotation range in
    degrees, boundary-offset sigma range in pixels."""

    split_rate: float = 0.1
    rot_min: float = -5.0
    rot_max: float = 5.0
    sigma_min: float = 5.0
    sigma_max: float = 20.0

    def __post_init__(self) -> None:
        if not self.split_rate > 0:
            raise ValueError("split_rate must be positive")
        if self.rot_min > self.rot_max:
            raise ValueError("rot_min must not exceed rot_max")
        if not 0 <= self.sigma_min <= self.sigma_max:
            raise ValueError("need 0 <= sigma_min <= sigma_max")


@dataclass(frozen=True)
class SeededStream:
    """Derives an independent, reproducible RNG per (master seed, document id)."""

    master_seed: int

    def __post_init__(self) -> None:
        if not 0 <= self.master_seed < MAX_SEED:
            raise ValueError("master_seed must fit in 64 bits")

    def for_document(self, doc_id: str) -> np.random.Generator:
        h = hashlib.blake2b(digest_size=8)
        h.update(self.master_seed.to_bytes(8, "little"))
        h.update(doc_id.encode("utf-8"))
        return np.random.Generator(np.random.PCG64(int.from_bytes(h.digest(), "little")))


def mask_segments(doc: Document) -> Document:
    """Keep word-level layout only: one singleton segment per word, each
    with the word's own box. Idempotent."""
    segments = tuple(Segment((i,), w.box) for i, w in enumerate(doc.words))
    return replace(doc, segments=segments)


def chunk_words(rng: np.random.Generator, rate: float) -> int:
    """One cutoff-length draw: max(1, round(Exp(rate))), half-even rounding."""
    return max(1, round(float(rng.exponential(1.0 / rate))))


def split_segments(doc: Document, rate: float, rng: np.random.Generator) -> Document:
    """Split each segment into chunks of sampled cutoff lengths.

    Word indices and order are unchanged; every output segment's box is the
    union of its member word boxes.
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    segments: list[Segment] = []
    for seg in doc.segments:
        members = seg.word_indices
        at = 0
        while at < len(members):
            k = chunk_words(rng, rate)
            chunk = members[at : at + k]
            segments.append(Segment(chunk, box_union(doc.words[i].box for i in chunk)))
            at += k
    return replace(doc, segments=tuple(segments))


def rotate_box(box: BoundingBox, cx: float, cy: float, theta_deg: float) -> BoundingBox:
    """Axis-aligned hull of the box rotated rigidly by theta about (cx, cy)."""
    t = math.radians(theta_deg)
    cos_t, sin_t = math.cos(t), math.sin(t)
    xs, ys = [], []
    for x, y in ((box.x0, box.y0), (box.x1, box.y0), (box.x1, box.y1), (box.x0, box.y1)):
        dx, dy = x - cx, y - cy
        xs.append(cx + dx * cos_t - dy * sin_t)
        ys.append(cy + dx * sin_t + dy * cos_t)
    return BoundingBox(min(xs), min(ys), max(xs), max(ys))


def rotate_regions(doc: Document, rot_min: float, rot_max: float,
                   rng: np.random.Generator) -> Document:
    """Rotate each segment (with its member words) by its own uniform angle
    about the segment box center, then re-box to axis-aligned hulls."""
    if rot_min > rot_max:
        raise ValueError("rot_min must not exceed rot_max")
    words = list(doc.words)
    segments: list[Segment] = []
    for seg in doc.segments:
        theta = float(rng.uniform(rot_min, rot_max))
        cx, cy = seg.box.center
        segments.append(replace(seg, box=rotate_box(seg.box, cx, cy, theta)))
        for wi in seg.word_indices:
            words[wi] = replace(words[wi], box=rotate_box(words[wi].box, cx, cy, theta))
    return replace(doc, words=tuple(words), segments=tuple(segments))


def _offset_box(box: BoundingBox, sigma_min: float, sigma_max: float,
                rng: np.random.Generator) -> BoundingBox:
    sigma = float(rng.uniform(sigma_min, sigma_max))
    dx0, dy0, dx1, dy1 = (float(d) for d in rng.normal(0.0, sigma, 4))
    return BoundingBox(box.x0 + dx0, box.y0 + dy0, box.x1 + dx1, box.y1 + dy1)


def offset_boundaries(doc: Document, sigma_min: float, sigma_max: float,
                      rng: np.random.Generator) -> Document:
    """Add signed gaussian offsets to all four boundaries of each region,
    with sigma drawn per region. Segment boxes are treated before word boxes."""
    if not 0 <= sigma_min <= sigma_max:
        raise ValueError("need 0 <= sigma_min <= sigma_max")
    segments = tuple(
        replace(seg, box=_offset_box(seg.box, sigma_min, sigma_max, rng))
        for seg in doc.segments
    )
    words = tuple(
        replace(word, box=_offset_box(word.box, sigma_min, sigma_max, rng))
        for word in doc.words
    )
    return replace(doc, words=words, segments=segments)


def repair_box(box: BoundingBox, width: float, height: float) -> BoundingBox:
    """Clamp to the page; re-open inverted sides around their midpoint with
    a minimum extent of 1 px kept inside the page."""

    def clamp(lo: float, hi: float, bound: float) -> tuple[float, float]:
        lo, hi = min(max(lo, 0.0), bound), min(max(hi, 0.0), bound)
        if lo > hi:
            mid = (lo + hi) / 2.0
            lo, hi = mid - 0.5, mid + 0.5
            if lo < 0.0:
                lo, hi = 0.0, min(1.0, bound)
            elif hi > bound:
                lo, hi = max(0.0, bound - 1.0), bound
        return lo, hi

    x0, x1 = clamp(box.x0, box.x1, width)
    y0, y1 = clamp(box.y0, box.y1, height)
    return BoundingBox(x0, y0, x1, y1)


def repair_boxes(doc: Document) -> Document:
    """Restore box invariants after perturbation. Idempotent.

    Every box is clamped and un-inverted; each segment box is then grown
    just enough to contain its member word centers, which perturbation may
    have pushed outside.
    """
    words = tuple(
        replace(w, box=repair_box(w.box, doc.width, doc.height)) for w in doc.words
    )
    segments = []
    for seg in doc.segments:
        box = repair_box(seg.box, doc.width, doc.height)
        for wi in seg.word_indices:
            cx, cy = words[wi].box.center
            box = box.union(BoundingBox(cx, cy, cx, cy))
        segments.append(replace(seg, box=box))
    return replace(doc, words=words, segments=tuple(segments))


def perturb(doc: Document, params: PerturbParams, master_seed: int) -> Document:
    """Full three-stage pipeline: split, rotate, offset, then repair, all
    drawing from one per-document substream."""
    rng = SeededStream(master_seed).for_document(doc.id)
    out = split_segments(doc, params.split_rate, rng)
    out = rotate_regions(out, params.rot_min, params.rot_max, rng)
    out = offset_boundaries(out, params.sigma_min, params.sigma_max, rng)
    return repair_boxes(out)
