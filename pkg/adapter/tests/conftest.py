"""Offline fixtures: a tiny layout model checkpoint and a canonical dataset."""

from __future__ import annotations

import json
import os
from pathlib import Path

import pytest

os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "date", ":", "/", "total", "amount", "paid", "form", "no", "memo",
    "the", "on", "a", "b", "c", "##s", "##:",
]

LABELS = ["O"] + [
    f"{prefix}-{label}"
    for label in ("question", "answer", "header", "other")
    for prefix in ("B", "I")
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> Path:
    """A LayoutLM-architecture token-classification checkpoint built locally:
    random weights, WordPiece vocab above, BIO label head."""
    import torch
    from transformers import (
        LayoutLMConfig,
        LayoutLMForTokenClassification,
        LayoutLMTokenizerFast,
    )

    path = tmp_path_factory.mktemp("tiny_layout_model")
    (path / "vocab.txt").write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    config = LayoutLMConfig(
        vocab_size=len(VOCAB),
        hidden_size=32,
        num_hidden_layers=1,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=512,
        max_2d_position_embeddings=1024,
        num_labels=len(LABELS),
        id2label=dict(enumerate(LABELS)),
        label2id={label: i for i, label in enumerate(LABELS)},
    )
    torch.manual_seed(1234)
    model = LayoutLMForTokenClassification(config)
    model.save_pretrained(path)
    LayoutLMTokenizerFast(str(path / "vocab.txt")).save_pretrained(path)
    return path


def _doc(doc_id: str, words: list[tuple[str, list[int]]], segment_members: list[list[int]],
         entities: list[tuple[str, int, int]], relations: list[tuple[int, int]]) -> dict:
    def union(indices):
        boxes = [words[i][1] for i in indices]
        return [
            min(b[0] for b in boxes), min(b[1] for b in boxes),
            max(b[2] for b in boxes), max(b[3] for b in boxes),
        ]

    return {
        "id": doc_id,
        "width": 800,
        "height": 600,
        "words": [{"text": t, "box": b} for t, b in words],
        "segments": [{"words": m, "box": union(m)} for m in segment_members],
        "entities": [{"type": t, "start": s, "end": e} for t, s, e in entities],
        "relations": [{"type": "link", "subject": s, "object": o} for s, o in relations],
    }


@pytest.fixture(scope="session")
def dataset_file(tmp_path_factory) -> Path:
    """Two documents with multi-word segments, so segment- and word-level
    layout inputs genuinely differ."""
    doc1 = _doc(
        "doc1",
        words=[
            ("DATE:", [40, 100, 120, 130]),
            ("04/1998", [130, 100, 230, 130]),
            ("TOTAL", [40, 200, 130, 230]),
            ("PAID", [140, 200, 220, 230]),
        ],
        segment_members=[[0, 1], [2, 3]],
        entities=[("question", 0, 1), ("answer", 1, 2), ("other", 2, 4)],
        relations=[(0, 1)],
    )
    doc2 = _doc(
        "doc2",
        words=[
            ("MEMO", [300, 20, 380, 50]),
            ("FORM", [390, 20, 470, 50]),
            ("NO:", [40, 300, 90, 330]),
            ("the", [100, 300, 140, 330]),
            ("amounts", [150, 300, 260, 330]),
        ],
        segment_members=[[0, 1], [2, 3, 4]],
        entities=[("header", 0, 2), ("question", 2, 3), ("answer", 3, 5)],
        relations=[(1, 2)],
    )
    payload = {
        "name": "adapter-fixture",
        "labels": ["question", "answer", "header", "other"],
        "relation_labels": ["link"],
        "documents": [doc1, doc2],
    }
    path = tmp_path_factory.mktemp("data") / "fixture.json"
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    return path
