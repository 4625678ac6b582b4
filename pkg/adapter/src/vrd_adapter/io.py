"""Minimal reader/writer for the harness's canonical file formats.

The adapter talks to the evaluation harness exclusively through these
files, so this module re-implements just enough of the format: it reads one
dataset split and writes byte-deterministic prediction files. Validation is
the harness's job.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class DocumentView:
    """The slice of a canonical document the adapter needs."""

    id: str
    width: int
    height: int
    texts: tuple[str, ...]
    word_boxes: tuple[tuple[float, float, float, float], ...]
    segment_of_word: dict[int, int]
    segment_boxes: tuple[tuple[float, float, float, float], ...]
    entities: tuple[tuple[str, int, int], ...]


@dataclass(frozen=True)
class DatasetView:
    name: str
    labels: tuple[str, ...]
    relation_labels: tuple[str, ...]
    documents: tuple[DocumentView, ...]


def read_dataset(path: str | Path) -> DatasetView:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    documents = []
    for doc in obj["documents"]:
        segment_of_word: dict[int, int] = {}
        segment_boxes = []
        for si, seg in enumerate(doc["segments"]):
            segment_boxes.append(tuple(seg["box"]))
            for wi in seg["words"]:
                segment_of_word[wi] = si
        documents.append(
            DocumentView(
                id=doc["id"],
                width=doc["width"],
                height=doc["height"],
                texts=tuple(w["text"] for w in doc["words"]),
                word_boxes=tuple(tuple(w["box"]) for w in doc["words"]),
                segment_of_word=segment_of_word,
                segment_boxes=tuple(segment_boxes),
                entities=tuple(
                    (e["type"], e["start"], e["end"]) for e in doc["entities"]
                ),
            )
        )
    return DatasetView(
        name=obj["name"],
        labels=tuple(obj["labels"]),
        relation_labels=tuple(obj["relation_labels"]),
        documents=tuple(documents),
    )


def write_predictions(task: str, records: list[dict], out: str | Path) -> Path:
    """Records are {"id": ..., "tags": [...]} or {"id": ..., "relations": [...]}."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {"task": task, "documents": records}
    out.write_bytes((json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8"))
    return out
