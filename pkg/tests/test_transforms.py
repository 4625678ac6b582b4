"""Masking and the seeded perturbation pipeline."""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import as_dataset, line_doc, random_document
from vrdeval.codec import serialize_dataset
from vrdeval.core import BoundingBox, Entity, validate_document
from vrdeval.transforms import (
    PerturbParams,
    SeededStream,
    chunk_words,
    mask_segments,
    offset_boundaries,
    perturb,
    repair_box,
    repair_boxes,
    rotate_box,
    rotate_regions,
    split_segments,
)


class FakeRng:
    """Feeds predetermined draws to a transform stage."""

    def __init__(self, exponential=(), uniform=(), normal=()):
        self._exp = list(exponential)
        self._uni = list(uniform)
        self._norm = list(normal)

    def exponential(self, scale):
        return self._exp.pop(0)

    def uniform(self, lo, hi):
        return self._uni.pop(0)

    def normal(self, loc, scale, size):
        out = self._norm.pop(0)
        assert len(out) == size
        return out


class TestMaskSegments:
    def test_singleton_segments_with_word_boxes(self):
        doc = line_doc(texts=("a", "b", "c"))
        out = mask_segments(doc)
        assert len(out.segments) == 3
        for i, seg in enumerate(out.segments):
            assert seg.word_indices == (i,)
            assert seg.box == out.words[i].box

    def test_idempotent(self):
        doc = line_doc(texts=("a", "b", "c"))
        assert mask_segments(mask_segments(doc)) == mask_segments(doc)

    def test_labels_untouched(self):
        doc = line_doc(
            texts=("a", "b", "c"),
            entities=(Entity("question", 0, 2),),
        )
        out = mask_segments(doc)
        assert (out.entities, out.relations, out.words) == (
            doc.entities, doc.relations, doc.words,
        )


class TestSplitSegments:
    def test_single_word_segment_unchanged(self):
        doc = line_doc(texts=("a",))
        out = split_segments(doc, 0.1, FakeRng(exponential=[99.0]))
        assert out.segments[0].word_indices == (0,)

    def test_forced_chunks(self):
        doc = line_doc(texts=("a", "b", "c", "d", "e"))
        out = split_segments(doc, 0.1, FakeRng(exponential=[2.0, 3.0]))
        assert [s.word_indices for s in out.segments] == [(0, 1), (2, 3, 4)]
        for seg in out.segments:
            assert seg.box == BoundingBox(
                min(doc.words[i].box.x0 for i in seg.word_indices),
                min(doc.words[i].box.y0 for i in seg.word_indices),
                max(doc.words[i].box.x1 for i in seg.word_indices),
                max(doc.words[i].box.y1 for i in seg.word_indices),
            )

    def test_word_order_conserved(self):
        rng = random.Random(3)
        doc = random_document(rng, "s")
        out = split_segments(doc, 0.5, SeededStream(1).for_document("s"))
        flat = [i for seg in out.segments for i in seg.word_indices]
        assert flat == list(range(doc.word_count))
        assert out.words == doc.words

    def test_chunk_sampler_mean(self):
        rng = SeededStream(7).for_document("sampler")
        draws = np.array([chunk_words(rng, 0.1) for _ in range(100_000)])
        assert abs(draws.mean() - 10.0) <= 0.3
        assert draws.min() >= 1


class TestRotateRegions:
    def test_zero_angle_is_identity(self):
        doc = line_doc(texts=("a", "b"))
        out = rotate_regions(doc, 0.0, 0.0, SeededStream(0).for_document("x"))
        assert out == doc

    def test_aabb_closed_form(self):
        w, h, theta = 100.0, 20.0, 5.0
        box = BoundingBox(0, 0, w, h)
        rot = rotate_box(box, w / 2, h / 2, theta)
        t = math.radians(abs(theta))
        assert rot.width == pytest.approx(w * math.cos(t) + h * math.sin(t), abs=1e-9)
        assert rot.height == pytest.approx(h * math.cos(t) + w * math.sin(t), abs=1e-9)
        assert rot.width == pytest.approx(101.36, abs=0.005)
        assert rot.height == pytest.approx(28.64, abs=0.005)

    def test_off_center_box_travels_on_arc(self):
        theta = 5.0
        box = BoundingBox(45, -5, 55, 5)  # centered 50 px right of the pivot
        rot = rotate_box(box, 0.0, 0.0, theta)
        (cx, cy) = rot.center
        moved = math.hypot(cx - 50.0, cy - 0.0)
        assert moved == pytest.approx(2 * 50 * math.sin(math.radians(theta / 2)), abs=1e-9)

    def test_one_angle_per_segment(self):
        doc = line_doc(texts=("a", "b", "c", "d"), segment_sizes=(2, 2))
        out = rotate_regions(doc, -5, 5, FakeRng(uniform=[5.0, 0.0]))
        assert out.words[2].box == doc.words[2].box  # second segment untouched
        assert out.words[0].box != doc.words[0].box


class TestOffsetBoundaries:
    def test_zero_sigma_is_identity(self):
        doc = line_doc(texts=("a", "b"))
        out = offset_boundaries(doc, 0.0, 0.0, SeededStream(0).for_document("x"))
        assert out == doc

    def test_forced_offsets_add_to_coordinates(self):
        base = line_doc(texts=("a",))
        seg_box = base.segments[0].box
        out = offset_boundaries(
            base, 1.0, 1.0,
            FakeRng(uniform=[1.0, 1.0], normal=[[3.0, -2.0, 1.0, 4.0], [0.0, 0.0, 0.0, 0.0]]),
        )
        assert out.segments[0].box == BoundingBox(
            seg_box.x0 + 3, seg_box.y0 - 2, seg_box.x1 + 1, seg_box.y1 + 4
        )
        assert out.words[0].box == base.words[0].box

    def test_segments_before_words_draw_order(self):
        base = line_doc(texts=("a",))
        out = offset_boundaries(
            base, 1.0, 1.0,
            FakeRng(uniform=[1.0, 1.0], normal=[[0.0] * 4, [5.0, 5.0, 5.0, 5.0]]),
        )
        assert out.segments[0].box == base.segments[0].box
        assert out.words[0].box != base.words[0].box

    def test_standardized_offsets(self):
        rng = SeededStream(11).for_document("offsets")
        sigmas = rng.uniform(5.0, 20.0, size=25_000)
        draws = rng.normal(0.0, 1.0, size=(25_000, 4))
        z = draws.reshape(-1)
        assert abs(z.mean()) < 0.02
        assert 0.99 <= z.std() <= 1.01
        assert sigmas.min() >= 5.0 and sigmas.max() <= 20.0


class TestRepairBoxes:
    def test_clamp(self):
        assert repair_box(BoundingBox(-5, 3, 9, 7), 100, 100) == BoundingBox(0, 3, 9, 7)

    def test_inverted_box_midpoint(self):
        assert repair_box(BoundingBox(12, 10, 8, 20), 100, 100) == BoundingBox(9.5, 10, 10.5, 20)

    def test_valid_box_unchanged(self):
        box = BoundingBox(1, 2, 3, 4)
        assert repair_box(box, 100, 100) == box

    def test_inverted_at_page_edge_stays_inside(self):
        out = repair_box(BoundingBox(0.4, 0, 0.2, 5), 100, 100)
        assert (out.x0, out.x1) == (0.0, 1.0)

    def test_idempotent_on_documents(self):
        rng = random.Random(5)
        for i in range(20):
            doc = random_document(rng, f"r{i}")
            noisy = offset_boundaries(doc, 5, 20, SeededStream(i).for_document(doc.id))
            repaired = repair_boxes(noisy)
            assert repair_boxes(repaired) == repaired
            assert validate_document(repaired) == []


class TestPerturb:
    def test_deterministic_for_seed(self):
        rng = random.Random(1)
        doc = random_document(rng, "p")
        params = PerturbParams()
        assert perturb(doc, params, 42) == perturb(doc, params, 42)
        assert perturb(doc, params, 42) != perturb(doc, params, 43)

    def test_labels_and_texts_preserved(self):
        rng = random.Random(2)
        for i in range(10):
            doc = random_document(rng, f"d{i}")
            out = perturb(doc, PerturbParams(), 7)
            assert out.entities == doc.entities
            assert out.relations == doc.relations
            assert [w.text for w in out.words] == [w.text for w in doc.words]

    def test_near_identity_params_split_to_singletons(self):
        doc = line_doc(texts=("a", "b", "c"))
        params = PerturbParams(split_rate=1e9, rot_min=0, rot_max=0,
                               sigma_min=0, sigma_max=0)
        out = perturb(doc, params, 0)
        assert [s.word_indices for s in out.segments] == [(0,), (1,), (2,)]
        assert out.words == doc.words

    def test_outputs_validate(self):
        rng = random.Random(4)
        for i in range(10):
            doc = random_document(rng, f"v{i}")
            assert validate_document(perturb(doc, PerturbParams(), 99)) == []

    def test_parallel_equals_sequential(self):
        rng = random.Random(9)
        docs = [random_document(rng, f"par{i}") for i in range(12)]
        params = PerturbParams()
        sequential = [perturb(d, params, 123) for d in docs]
        with ThreadPoolExecutor(max_workers=4) as pool:
            parallel = list(pool.map(lambda d: perturb(d, params, 123), docs))
        a = serialize_dataset(as_dataset(*sequential))
        b = serialize_dataset(as_dataset(*parallel))
        assert a == b


class TestSeededStream:
    def test_same_key_same_draws(self):
        a = SeededStream(5).for_document("doc-1")
        b = SeededStream(5).for_document("doc-1")
        assert a.uniform(0, 1, 8).tolist() == b.uniform(0, 1, 8).tolist()

    def test_distinct_documents_diverge(self):
        a = SeededStream(5).for_document("doc-1")
        b = SeededStream(5).for_document("doc-2")
        assert a.uniform(0, 1, 8).tolist() != b.uniform(0, 1, 8).tolist()

    def test_seed_range_enforced(self):
        with pytest.raises(ValueError):
            SeededStream(-1)
        with pytest.raises(ValueError):
            SeededStream(2**64)

    @given(st.integers(0, 2**64 - 1), st.text(max_size=12))
    def test_any_key_is_accepted(self, seed, doc_id):
        rng = SeededStream(seed).for_document(doc_id)
        assert 0.0 <= float(rng.uniform(0, 1)) <= 1.0


class TestParams:
    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            PerturbParams(split_rate=0)
        with pytest.raises(ValueError):
            PerturbParams(rot_min=3, rot_max=-3)
        with pytest.raises(ValueError):
            PerturbParams(sigma_min=-1)
        with pytest.raises(ValueError):
            PerturbParams(sigma_min=9, sigma_max=2)
