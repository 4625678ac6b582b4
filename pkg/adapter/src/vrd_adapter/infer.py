"""Batch inference over canonical dataset files.

SER runs a token-classification text-and-layout model and emits per-word
BIO tags, aggregating subword predictions by the first-subword rule.
Documents longer than the sequence budget are windowed with half-window
overlap and merged first-window-wins. EL scores ordered pairs of gold
entities with a deterministic bilinear head over mean entity embeddings;
the head is freshly seeded, so its output is well-formed plumbing rather
than a trained prediction.

The layout mode decides which boxes the model sees: "segment" feeds every
word its segment's box, "word" feeds each word its own box and no segment
geometry at all.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import torch

from .io import DatasetView, DocumentView, read_dataset, write_predictions

LAYOUT_MODES = ("segment", "word")
TASKS = ("ser", "el")


@dataclass(frozen=True)
class AdapterConfig:
    model: str
    task: str = "ser"
    layout_mode: str = "segment"
    device: str = "cpu"
    max_seq_len: int = 512
    head_seed: int = 0

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.layout_mode not in LAYOUT_MODES:
            raise ValueError(
                f"layout_mode must be one of {LAYOUT_MODES}, got {self.layout_mode!r}"
            )
        if self.max_seq_len < 8:
            raise ValueError("max_seq_len too small")


def normalized_boxes(doc: DocumentView, layout_mode: str) -> list[list[int]]:
    """Per-word boxes on the 0-1000 grid layout models expect."""

    def norm(box):
        x0, y0, x1, y1 = box
        return [
            max(0, min(1000, round(1000 * x0 / doc.width))),
            max(0, min(1000, round(1000 * y0 / doc.height))),
            max(0, min(1000, round(1000 * x1 / doc.width))),
            max(0, min(1000, round(1000 * y1 / doc.height))),
        ]

    if layout_mode == "word":
        return [norm(b) for b in doc.word_boxes]
    return [
        norm(doc.segment_boxes[doc.segment_of_word[wi]])
        for wi in range(len(doc.texts))
    ]


def plan_windows(subwords_per_word: list[int], budget: int) -> list[tuple[int, int]]:
    """Half-open word windows whose subword totals fit the budget, with
    half-window overlap between consecutive windows."""
    n = len(subwords_per_word)
    windows = []
    start = 0
    while start < n:
        end, used = start, 0
        while end < n and (used + subwords_per_word[end] <= budget or end == start):
            used += subwords_per_word[end]
            end += 1
        windows.append((start, end))
        if end >= n:
            break
        start = max(start + 1, end - (end - start) // 2)
    return windows


class Adapter:
    def __init__(self, config: AdapterConfig) -> None:
        from transformers import AutoModelForTokenClassification, AutoTokenizer

        self.config = config
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        self.model = AutoModelForTokenClassification.from_pretrained(config.model)
        self.model.to(config.device)
        self.model.eval()
        self.id2label = {int(k): v for k, v in self.model.config.id2label.items()}
        for label in self.id2label.values():
            if label != "O" and not (len(label) > 2 and label[1] == "-" and label[0] in "BI"):
                raise ValueError(
                    f"model label {label!r} is not BIO-shaped; cannot emit tag predictions"
                )

    def _encode_window(self, words: list[str], boxes: list[list[int]]):
        enc = self.tokenizer(
            words,
            is_split_into_words=True,
            return_tensors="pt",
            truncation=True,
            max_length=self.config.max_seq_len,
        )
        word_ids = enc.word_ids(0)
        bbox = torch.zeros((1, enc["input_ids"].shape[1], 4), dtype=torch.long)
        for pos, wid in enumerate(word_ids):
            if wid is not None:
                bbox[0, pos] = torch.tensor(boxes[wid], dtype=torch.long)
        return enc, word_ids, bbox

    def _window_states(self, doc: DocumentView, capture: Callable | None):
        """Yield (window, word_ids, logits, hidden) per window."""
        boxes = normalized_boxes(doc, self.config.layout_mode)
        budget = self.config.max_seq_len - self.tokenizer.num_special_tokens_to_add()
        counts = [
            max(1, len(self.tokenizer.tokenize(t) or [self.tokenizer.unk_token]))
            for t in doc.texts
        ]
        for window in plan_windows(counts, budget):
            start, end = window
            enc, word_ids, bbox = self._encode_window(doc.texts[start:end], boxes[start:end])
            if capture is not None:
                capture({
                    "doc_id": doc.id,
                    "window": window,
                    "layout_mode": self.config.layout_mode,
                    "boxes": boxes[start:end],
                    "input_ids": enc["input_ids"],
                    "bbox": bbox,
                })
            with torch.no_grad():
                out = self.model(
                    input_ids=enc["input_ids"].to(self.config.device),
                    attention_mask=enc["attention_mask"].to(self.config.device),
                    bbox=bbox.to(self.config.device),
                    output_hidden_states=True,
                )
            yield window, word_ids, out.logits[0], out.hidden_states[-1][0]

    def tag_document(self, doc: DocumentView, capture: Callable | None = None) -> list[str]:
        """First-subword BIO tag per word, merged first-window-wins."""
        tags: list[str | None] = [None] * len(doc.texts)
        for (start, _end), word_ids, logits, _hidden in self._window_states(doc, capture):
            choice = logits.argmax(-1).tolist()
            seen = set()
            for pos, wid in enumerate(word_ids):
                if wid is None or wid in seen:
                    continue
                seen.add(wid)
                global_wi = start + wid
                if tags[global_wi] is None:
                    tags[global_wi] = self.id2label[choice[pos]]
        return [t if t is not None else "O" for t in tags]

    def word_embeddings(self, doc: DocumentView, capture: Callable | None = None) -> torch.Tensor:
        """First-subword encoder state per word, first-window-wins."""
        dim = self.model.config.hidden_size
        states = torch.zeros((len(doc.texts), dim))
        filled = [False] * len(doc.texts)
        for (start, _end), word_ids, _logits, hidden in self._window_states(doc, capture):
            seen = set()
            for pos, wid in enumerate(word_ids):
                if wid is None or wid in seen:
                    continue
                seen.add(wid)
                global_wi = start + wid
                if not filled[global_wi]:
                    states[global_wi] = hidden[pos]
                    filled[global_wi] = True
        return states

    def link_document(self, doc: DocumentView, rtype: str,
                      capture: Callable | None = None) -> list[dict]:
        """Score ordered gold-entity pairs with a seeded bilinear head."""
        if len(doc.entities) < 2:
            return []
        states = self.word_embeddings(doc, capture)
        embeds = torch.stack([
            states[start:end].mean(dim=0) for (_t, start, end) in doc.entities
        ])
        gen = torch.Generator().manual_seed(self.config.head_seed)
        dim = embeds.shape[1]
        weight = torch.randn((dim, dim), generator=gen) / dim**0.5
        scores = embeds @ weight @ embeds.T
        relations = []
        for s in range(len(doc.entities)):
            for o in range(len(doc.entities)):
                if s != o and scores[s, o].item() > 0:
                    relations.append({"type": rtype, "subject": s, "object": o})
        return relations


def infer(config: AdapterConfig, dataset_path: str | Path, out: str | Path,
          input_capture: Callable | None = None) -> Path:
    """Run the configured model over a canonical dataset file and write a
    canonical prediction file covering every document id."""
    dataset = read_dataset(dataset_path)
    adapter = Adapter(config)
    records = []
    for doc in dataset.documents:
        if config.task == "ser":
            records.append({"id": doc.id, "tags": adapter.tag_document(doc, input_capture)})
        else:
            rtype = dataset.relation_labels[0] if dataset.relation_labels else "link"
            records.append(
                {"id": doc.id, "relations": adapter.link_document(doc, rtype, input_capture)}
            )
    return write_predictions(config.task, records, out)
