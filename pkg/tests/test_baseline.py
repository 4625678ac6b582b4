"""Heuristic tagger and linker rules."""

from __future__ import annotations

from conftest import word
from vrdeval.baseline import BaselineConfig, link_el, tag_ser
from vrdeval.core import Document, Entity, RelationTriplet, Segment, box_union


def seg_doc(*segments, width=1000, height=1000, entities=(), relations=()):
    """Each argument is a list of (text, x0, y0, x1, y1) forming one segment."""
    words, segs = [], []
    for entry in segments:
        members = []
        for text, x0, y0, x1, y1 in entry:
            members.append(len(words))
            words.append(word(text, x0, y0, x1, y1))
        segs.append(Segment(tuple(members), box_union(words[i].box for i in members)))
    return Document("b", width, height, tuple(words), tuple(segs),
                    tuple(entities), tuple(relations))


class TestTagSer:
    def test_colon_makes_question(self):
        doc = seg_doc([("DATE:", 40, 500, 140, 530)])
        assert tag_ser(doc) == (Entity("question", 0, 1),)

    def test_top_band_makes_header(self):
        doc = seg_doc([("SUMMARY", 300, 40, 500, 60)])  # y-center 50 = 0.05 * height
        assert tag_ser(doc) == (Entity("header", 0, 1),)

    def test_colon_beats_header(self):
        doc = seg_doc([("TITLE:", 300, 40, 500, 60)])
        assert tag_ser(doc) == (Entity("question", 0, 1),)

    def test_right_of_question_is_answer(self):
        doc = seg_doc(
            [("NAME:", 40, 500, 140, 530)],
            [("Smith", 200, 500, 300, 530)],
        )
        assert tag_ser(doc)[1] == Entity("answer", 1, 2)

    def test_below_question_is_answer(self):
        doc = seg_doc(
            [("NOTES:", 40, 500, 140, 530)],
            [("none", 40, 550, 140, 580)],
        )
        assert tag_ser(doc)[1] == Entity("answer", 1, 2)

    def test_unrelated_segment_is_other(self):
        doc = seg_doc(
            [("lorem", 40, 500, 140, 530)],
            [("ipsum", 600, 800, 700, 830)],
        )
        assert [e.etype for e in tag_ser(doc)] == ["other", "other"]

    def test_non_question_left_neighbor_blocks_answer(self):
        doc = seg_doc(
            [("plain", 40, 500, 140, 530)],
            [("text", 200, 500, 300, 530)],
        )
        assert tag_ser(doc)[1].etype == "other"

    def test_one_entity_per_segment_covering_words(self, fixture_dataset):
        for doc in fixture_dataset.split_docs("all"):
            preds = tag_ser(doc)
            assert len(preds) == len(doc.segments)
            covered = sorted(i for e in preds for i in range(e.start, e.end))
            assert covered == list(range(doc.word_count))

    def test_deterministic(self, fixture_dataset):
        for doc in fixture_dataset.split_docs("all"):
            assert tag_ser(doc) == tag_ser(doc)


class TestLinkEl:
    def test_unique_candidate(self):
        doc = seg_doc(
            [("K:", 10, 10, 30, 30)],
            [("V", 60, 10, 80, 30)],
            entities=(Entity("question", 0, 1), Entity("answer", 1, 2)),
        )
        assert link_el(doc) == (RelationTriplet("link", 0, 1),)

    def test_no_candidate_above_or_left(self):
        doc = seg_doc(
            [("V", 10, 10, 30, 30)],
            [("K:", 60, 60, 90, 90)],
            entities=(Entity("answer", 0, 1), Entity("question", 1, 2)),
        )
        assert link_el(doc) == ()

    def test_equidistant_tie_prefers_lower_index(self):
        doc = seg_doc(
            [("A:", 20, 100, 40, 120)],   # center (30, 110), distance 70
            [("B:", 90, 30, 110, 50)],    # center (100, 40), distance 70
            [("val", 90, 100, 110, 120)],  # center (100, 110)
            entities=(
                Entity("question", 0, 1),
                Entity("question", 1, 2),
                Entity("answer", 2, 3),
            ),
        )
        assert link_el(doc) == (RelationTriplet("link", 0, 2),)

    def test_max_distance_cutoff(self):
        doc = seg_doc(
            [("far:", 10, 10, 30, 30)],
            [("away", 900, 900, 950, 930)],
            entities=(Entity("question", 0, 1), Entity("answer", 1, 2)),
        )
        assert link_el(doc, config=BaselineConfig(link_max_distance=100.0)) == ()

    def test_at_most_one_link_per_answer(self, fixture_dataset):
        for doc in fixture_dataset.split_docs("all"):
            links = link_el(doc)
            objects = [r.object for r in links]
            assert len(objects) == len(set(objects))
            assert len({(r.subject, r.object) for r in links}) == len(links)
