"""Dataset diagnostics: layout-leakage signatures and complex entities.

Block-level annotation couples segments to entities, so every token of an
entity arrives with identical segment-level coordinates and entity
boundaries coincide with segment boundaries. The two fractions below
measure that coupling; both are exactly 1.0 on block-derived data and drop
once entities are annotated independently of layout.

A "complex" entity either occupies two or more text rows or has another
entity's word centered inside its region; these are the hard cases for a
sequence labeler and form the fairness subset.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Dataset, Document, entity_box, row_clusters


@dataclass(frozen=True)
class DocumentDiagnostics:
    doc_id: str
    multiword_entities: int
    uniform_entities: int
    boundaries: int
    aligned_boundaries: int
    complex_indices: tuple[int, ...]


@dataclass(frozen=True)
class DiagnosticsReport:
    dataset: str
    split: str
    entity_count: int
    entity_layout_uniformity: float
    boundary_alignment: float
    complex_count: int
    complex_proportion: float
    complex_multirow_only: int
    complex_intrusion_only: int
    complex_both: int
    per_document: tuple[DocumentDiagnostics, ...]


def _uniformity_counts(doc: Document) -> tuple[int, int]:
    """(multi-word entities, those whose words share one segment)."""
    word_seg = doc.word_to_segment()
    multi = uniform = 0
    for ent in doc.entities:
        if len(ent) < 2:
            continue
        multi += 1
        owners = {word_seg.get(wi) for wi in range(ent.start, ent.end)}
        if len(owners) == 1 and None not in owners:
            uniform += 1
    return multi, uniform


def _alignment_counts(doc: Document) -> tuple[int, int]:
    """(entity boundary positions, those coinciding with a segment boundary)."""
    starts = {seg.span[0] for seg in doc.segments}
    ends = {seg.span[1] for seg in doc.segments}
    total = aligned = 0
    for ent in doc.entities:
        total += 2
        aligned += (ent.start in starts) + (ent.end in ends)
    return total, aligned


def entity_layout_uniformity(dataset: Dataset, split: str) -> float:
    """Fraction of multi-word entities whose member words all lie in one
    segment. Vacuously 1.0 when the split has no multi-word entities."""
    multi = uniform = 0
    for doc in dataset.split_docs(split):
        m, u = _uniformity_counts(doc)
        multi, uniform = multi + m, uniform + u
    return uniform / multi if multi else 1.0


def boundary_alignment(dataset: Dataset, split: str) -> float:
    """Fraction of entity start/end positions coinciding with a segment
    start/end position. Vacuously 1.0 when the split has no entities."""
    total = aligned = 0
    for doc in dataset.split_docs(split):
        t, a = _alignment_counts(doc)
        total, aligned = total + t, aligned + a
    return aligned / total if total else 1.0


def _complex_clauses(doc: Document, entity_index: int,
                     rows: list[int] | None = None) -> tuple[bool, bool]:
    """(spans multiple rows, intruded by another entity's word)."""
    if not 0 <= entity_index < len(doc.entities):
        raise IndexError(f"entity index {entity_index} out of range")
    ent = doc.entities[entity_index]
    if rows is None:
        rows = row_clusters(doc)
    multirow = len({rows[wi] for wi in range(ent.start, ent.end)}) >= 2

    box = entity_box(doc, entity_index)
    word_ent = doc.word_to_entity()
    intruded = False
    for wi, owner in word_ent.items():
        if owner == entity_index:
            continue
        if box.contains_point(*doc.words[wi].box.center):
            intruded = True
            break
    return multirow, intruded


def is_complex(doc: Document, entity_index: int, rows: list[int] | None = None) -> bool:
    """True iff the entity spans >= 2 rows or its region contains the center
    of a word belonging to a different entity. ``rows`` may be passed to
    reuse a row clustering across entities of the same document."""
    multirow, intruded = _complex_clauses(doc, entity_index, rows)
    return multirow or intruded


def diagnostics(dataset: Dataset, split: str) -> DiagnosticsReport:
    """Full diagnostics over a split: uniformity, alignment, complex subset
    with a per-clause breakdown."""
    per_doc: list[DocumentDiagnostics] = []
    entity_count = multi = uniform = total_b = aligned_b = 0
    n_multirow_only = n_intrusion_only = n_both = 0
    for doc in dataset.split_docs(split):
        rows = row_clusters(doc)
        complex_indices = []
        for ei in range(len(doc.entities)):
            multirow, intruded = _complex_clauses(doc, ei, rows)
            if multirow or intruded:
                complex_indices.append(ei)
            n_multirow_only += multirow and not intruded
            n_intrusion_only += intruded and not multirow
            n_both += multirow and intruded
        m, u = _uniformity_counts(doc)
        t, a = _alignment_counts(doc)
        entity_count += len(doc.entities)
        multi, uniform = multi + m, uniform + u
        total_b, aligned_b = total_b + t, aligned_b + a
        per_doc.append(
            DocumentDiagnostics(doc.id, m, u, t, a, tuple(complex_indices))
        )
    complex_count = n_multirow_only + n_intrusion_only + n_both
    return DiagnosticsReport(
        dataset=dataset.name,
        split=split,
        entity_count=entity_count,
        entity_layout_uniformity=uniform / multi if multi else 1.0,
        boundary_alignment=aligned_b / total_b if total_b else 1.0,
        complex_count=complex_count,
        complex_proportion=complex_count / entity_count if entity_count else 0.0,
        complex_multirow_only=n_multirow_only,
        complex_intrusion_only=n_intrusion_only,
        complex_both=n_both,
        per_document=tuple(per_doc),
    )


def complex_subset(dataset: Dataset, split: str) -> tuple[dict[str, tuple[int, ...]], DiagnosticsReport]:
    """Per-document complex entity indices plus the diagnostics report."""
    report = diagnostics(dataset, split)
    subset = {d.doc_id: d.complex_indices for d in report.per_document}
    return subset, report
