#!/usr/bin/env python3
"""Run the four evaluation protocols end to end with the heuristic baseline.

Given a canonical dataset this scores the baseline on the clean split
(absolute performance), on masked word-level-only layout (generalization),
on seeded perturbed layout (robustness), and reports complex-entity recall
(fairness). Reports land in --outdir; a summary table prints to stdout.

    python3 scripts/run_protocols.py --dataset tests/data/golden/imported/all.json \
        --outdir /tmp/protocols --seed 42
"""

from __future__ import annotations

import argparse
from pathlib import Path

from vrdeval.analysis import complex_subset, diagnostics
from vrdeval.baseline import BaselineConfig, link_el, tag_ser
from vrdeval.codec import (
    PredictionRecord,
    PredictionSet,
    canonical_json_bytes,
    load_dataset,
    serialize_predictions,
)
from vrdeval.metrics import el_prf, ser_prf, subset_recall
from vrdeval.transforms import PerturbParams, mask_segments, perturb


def baseline_predictions(docs, task: str, config: BaselineConfig) -> PredictionSet:
    records = {}
    for doc in docs:
        if task == "ser":
            records[doc.id] = PredictionRecord(doc.id, entities=tag_ser(doc, config))
        else:
            records[doc.id] = PredictionRecord(doc.id, relations=link_el(doc, None, config))
    return PredictionSet(task, records)


def score(docs, labels, config) -> dict:
    ser = ser_prf(docs, baseline_predictions(docs, "ser", config), labels)
    el = el_prf(docs, baseline_predictions(docs, "el", config))
    return {
        "ser": {"tp": ser.tp, "predicted": ser.predicted, "gold": ser.gold,
                "f1": round(ser.f1, 4)},
        "el": {"tp": el.tp, "predicted": el.predicted, "gold": el.gold,
               "f1": round(el.f1, 4)},
    }


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dataset", required=True)
    parser.add_argument("--split", default="all")
    parser.add_argument("--outdir", required=True)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    dataset = load_dataset(args.dataset)
    docs = dataset.split_docs(args.split)
    labels = dataset.label_set
    config = BaselineConfig()

    masked = tuple(mask_segments(d) for d in docs)
    perturbed = tuple(perturb(d, PerturbParams(), args.seed) for d in docs)

    report = {
        "dataset": args.dataset,
        "split": args.split,
        "seed": args.seed,
        "diagnostics": {},
        "protocols": {
            "absolute": score(docs, labels, config),
            "generalization": score(masked, labels, config),
            "robustness": score(perturbed, labels, config),
        },
    }

    diag = diagnostics(dataset, args.split)
    report["diagnostics"] = {
        "entity_layout_uniformity": round(diag.entity_layout_uniformity, 4),
        "boundary_alignment": round(diag.boundary_alignment, 4),
        "complex_proportion": round(diag.complex_proportion, 6),
    }

    subset, _ = complex_subset(dataset, args.split)
    preds = baseline_predictions(docs, "ser", config)
    total = ser_prf(docs, preds, labels)
    sub = subset_recall(docs, preds, subset, labels)
    report["protocols"]["fairness"] = {
        "recall_all": round(total.recall, 4),
        "recall_complex": round(sub.recall, 4),
        "subset_size": sub.subset_size,
    }

    (outdir / "protocols.json").write_bytes(canonical_json_bytes(report))
    for task in ("ser", "el"):
        (outdir / f"baseline_{task}.json").write_bytes(
            serialize_predictions(baseline_predictions(docs, task, config))
        )

    print(f"{'protocol':<16} {'SER F1':>8} {'EL F1':>8}")
    for name in ("absolute", "generalization", "robustness"):
        block = report["protocols"][name]
        print(f"{name:<16} {block['ser']['f1']:>8.4f} {block['el']['f1']:>8.4f}")
    fair = report["protocols"]["fairness"]
    print(f"{'fairness':<16} recall all={fair['recall_all']:.4f} "
          f"complex={fair['recall_complex']:.4f} (n={fair['subset_size']})")
    print(f"reports written to {outdir}")


if __name__ == "__main__":
    main()
