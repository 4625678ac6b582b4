"""Command-line entry point tying the harness together.

Subcommands: validate, stats, import-funsd, mask-segments, perturb,
diagnose, fairness-subset, eval-ser, eval-el, fairness, baseline.

Exit codes: 0 success, 2 usage error, 3 parse/format error, 4 validation
failure, 5 scoring error. Reports embed the full configuration, a content
fingerprint of the evaluated split, and raw counts next to every rounded
metric, so any report can be reproduced exactly from its own body.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import DiagnosticsReport, complex_subset, diagnostics
from .baseline import BaselineConfig, link_el, tag_ser
from .codec import (
    CodecError,
    ImportOptions,
    InvariantError,
    ParseError,
    PredictionRecord,
    PredictionSet,
    RELATION_DIRECTION_RULES,
    SchemaError,
    bind_predictions,
    canonical_json_bytes,
    import_funsd,
    load_dataset,
    parse_dataset,
    parse_predictions,
    serialize_dataset,
    serialize_predictions,
    write_dataset,
)
from .core import ALL_SPLIT, Dataset, dataset_stats, validate_dataset
from .metrics import PRF, ScoringError, el_prf, ser_prf, subset_recall
from .transforms import MAX_SEED, PerturbParams, mask_segments, perturb

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_SCORING = 5


def _fingerprint(dataset: Dataset, split: str) -> str:
    docs = dataset.split_docs(split)
    view = Dataset(dataset.name, dataset.label_set, dataset.relation_label_set, {split: docs})
    return "sha256:" + hashlib.sha256(serialize_dataset(view)).hexdigest()


def _dataset_block(dataset: Dataset, split: str, path: str) -> dict:
    return {
        "path": path,
        "name": dataset.name,
        "split": split,
        "documents": len(dataset.split_docs(split)),
        "fingerprint": _fingerprint(dataset, split),
    }


def _prf_block(prf: PRF) -> dict:
    return {
        "true_positives": prf.tp,
        "predicted": prf.predicted,
        "gold": prf.gold,
        "precision": round(prf.precision, 4),
        "recall": round(prf.recall, 4),
        "f1": round(prf.f1, 4),
    }


def _diag_block(rep: DiagnosticsReport) -> dict:
    return {
        "entity_count": rep.entity_count,
        "entity_layout_uniformity": round(rep.entity_layout_uniformity, 4),
        "boundary_alignment": round(rep.boundary_alignment, 4),
        "complex_count": rep.complex_count,
        "complex_proportion": round(rep.complex_proportion, 6),
        "complex_multirow_only": rep.complex_multirow_only,
        "complex_intrusion_only": rep.complex_intrusion_only,
        "complex_both": rep.complex_both,
    }


def _fmt_md(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _markdown(report: dict) -> str:
    lines = [f"# {report.get('command', 'report')}", ""]
    for key, value in report.items():
        if key == "command":
            continue
        if isinstance(value, dict) and value and all(
            isinstance(v, dict) for v in value.values()
        ):
            lines.append(f"## {key}")
            lines.append("")
            for sub, block in value.items():
                lines.append(f"### {sub}")
                lines.append("")
                lines.append("| field | value |")
                lines.append("| --- | --- |")
                lines.extend(f"| {k} | {_fmt_md(v)} |" for k, v in block.items())
                lines.append("")
        elif isinstance(value, dict):
            lines.append(f"## {key}")
            lines.append("")
            lines.append("| field | value |")
            lines.append("| --- | --- |")
            lines.extend(f"| {k} | {_fmt_md(v)} |" for k, v in value.items())
            lines.append("")
        elif isinstance(value, list):
            lines.append(f"## {key}")
            lines.append("")
            for item in value:
                lines.append(f"- {item}")
            lines.append("")
        else:
            lines.append(f"- {key}: {_fmt_md(value)}")
            lines.append("")
    return "\n".join(lines).rstrip("\n") + "\n"


def _emit(args, report: dict) -> None:
    if args.format == "markdown":
        data = _markdown(report).encode("utf-8")
    else:
        data = canonical_json_bytes(report)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode("utf-8"))


def _report(command: str, config: dict, dataset_block: dict, **blocks) -> dict:
    out = {
        "command": command,
        "tool_version": __version__,
        "config": config,
        "dataset": dataset_block,
    }
    out.update(blocks)
    return out


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_validate(args) -> int:
    dataset = load_dataset(args.dataset, validate=False)
    violations = validate_dataset(dataset)
    for doc_id, v in violations:
        print(f"{doc_id}: {v}")
    docs = sum(len(d) for d in dataset.splits.values())
    if violations:
        print(f"{len(violations)} violation(s) across {docs} document(s)")
        return EXIT_VALIDATION
    print(f"OK: {docs} document(s), no violations")
    return EXIT_OK


def _cmd_stats(args) -> int:
    dataset = load_dataset(args.dataset)
    rep = dataset_stats(dataset, args.split)
    report = _report(
        "stats",
        {"dataset": args.dataset, "split": args.split},
        _dataset_block(dataset, args.split, args.dataset),
        statistics={
            "samples": rep.samples,
            "segments": rep.segments,
            "words": rep.words,
            "entities": rep.entities,
            "relations": rep.relations,
            "complex_entities": rep.complex_entities,
            "segments_per_sample": rep.segments_per_sample,
            "words_per_sample": rep.words_per_sample,
            "entities_per_sample": rep.entities_per_sample,
            "relations_per_sample": rep.relations_per_sample,
            "avg_segment_len": rep.avg_segment_len,
            "avg_entity_len": rep.avg_entity_len,
            "complex_proportion": round(rep.complex_proportion, 6),
        },
    )
    _emit(args, report)
    return EXIT_OK


def _cmd_import_funsd(args) -> int:
    options = ImportOptions(
        drop_invalid_links=not args.keep_invalid_links,
        relation_direction=args.relation_direction,
    )
    dataset = import_funsd(args.dataset, options)
    written = write_dataset(dataset, args.out)
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _transform_command(args, name: str) -> int:
    dataset = parse_dataset(args.dataset)
    docs = dataset.split_docs(ALL_SPLIT)
    source = _fingerprint(dataset, ALL_SPLIT)
    if name == "mask-segments":
        out_docs = tuple(mask_segments(d) for d in docs)
        provenance = {"transform": name, "source": source}
    else:
        params = PerturbParams(
            split_rate=args.split_rate,
            rot_min=args.rot_min,
            rot_max=args.rot_max,
            sigma_min=args.sigma_min,
            sigma_max=args.sigma_max,
        )
        out_docs = tuple(perturb(d, params, args.seed) for d in docs)
        provenance = {
            "transform": name,
            "params": {
                "split_rate": params.split_rate,
                "rot_min": params.rot_min,
                "rot_max": params.rot_max,
                "sigma_min": params.sigma_min,
                "sigma_max": params.sigma_max,
            },
            "master_seed": args.seed,
            "source": source,
        }
    out = Dataset(
        dataset.name,
        dataset.label_set,
        dataset.relation_label_set,
        {ALL_SPLIT: out_docs},
        provenance,
    )
    target = Path(args.out)
    if target.suffix != ".json":
        print(f"--out must name a .json file, got {target}", file=sys.stderr)
        return EXIT_USAGE
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(serialize_dataset(out))
    print(f"wrote {target}")
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    dataset = load_dataset(args.dataset)
    rep = diagnostics(dataset, args.split)
    report = _report(
        "diagnose",
        {"dataset": args.dataset, "split": args.split},
        _dataset_block(dataset, args.split, args.dataset),
        diagnostics=_diag_block(rep),
    )
    _emit(args, report)
    return EXIT_OK


def _cmd_fairness_subset(args) -> int:
    dataset = load_dataset(args.dataset)
    subset, rep = complex_subset(dataset, args.split)
    report = _report(
        "fairness-subset",
        {"dataset": args.dataset, "split": args.split},
        _dataset_block(dataset, args.split, args.dataset),
        diagnostics=_diag_block(rep),
        documents=[
            {"id": doc_id, "entities": list(indices)} for doc_id, indices in subset.items()
        ],
    )
    if args.format == "markdown":
        report["documents"] = [
            f"{d['id']}: {d['entities']}" for d in report["documents"]
        ]
    _emit(args, report)
    return EXIT_OK


def _load_bound_predictions(args, dataset: Dataset):
    preds = parse_predictions(args.predictions)
    problems = bind_predictions(preds, dataset, args.split)
    if problems:
        raise ScoringError(
            "\n".join([f"{args.predictions}: predictions do not bind to split"]
                      + [f"  {v}" for v in problems])
        )
    return preds


def _cmd_eval_ser(args) -> int:
    dataset = load_dataset(args.dataset)
    preds = _load_bound_predictions(args, dataset)
    prf = ser_prf(dataset.split_docs(args.split), preds, dataset.label_set)
    report = _report(
        "eval-ser",
        {"dataset": args.dataset, "split": args.split, "predictions": args.predictions},
        _dataset_block(dataset, args.split, args.dataset),
        metrics={"ser": _prf_block(prf)},
    )
    _emit(args, report)
    return EXIT_OK


def _cmd_eval_el(args) -> int:
    dataset = load_dataset(args.dataset)
    preds = _load_bound_predictions(args, dataset)
    prf = el_prf(dataset.split_docs(args.split), preds)
    report = _report(
        "eval-el",
        {"dataset": args.dataset, "split": args.split, "predictions": args.predictions},
        _dataset_block(dataset, args.split, args.dataset),
        metrics={"el": _prf_block(prf)},
    )
    _emit(args, report)
    return EXIT_OK


def _cmd_fairness(args) -> int:
    dataset = load_dataset(args.dataset)
    preds = _load_bound_predictions(args, dataset)
    docs = dataset.split_docs(args.split)
    if args.subset:
        obj = json.loads(Path(args.subset).read_text(encoding="utf-8"))
        subset = {d["id"]: tuple(d["entities"]) for d in obj["documents"]}
        subset_source = args.subset
    else:
        subset, _ = complex_subset(dataset, args.split)
        subset_source = "computed"
    total = ser_prf(docs, preds, dataset.label_set)
    sub = subset_recall(docs, preds, subset, dataset.label_set)
    report = _report(
        "fairness",
        {
            "dataset": args.dataset,
            "split": args.split,
            "predictions": args.predictions,
            "subset": subset_source,
        },
        _dataset_block(dataset, args.split, args.dataset),
        metrics={
            "recall_all": _prf_block(total),
            "recall_complex": {
                "recalled": sub.recalled,
                "subset_size": sub.subset_size,
                "recall": round(sub.recall, 4),
                "empty_subset": sub.empty_subset,
            },
        },
    )
    _emit(args, report)
    return EXIT_OK


def _cmd_baseline(args) -> int:
    dataset = load_dataset(args.dataset)
    docs = dataset.split_docs(args.split)
    config = BaselineConfig(
        header_band=args.header_band, link_max_distance=args.link_max_distance
    )
    records = {}
    for doc in docs:
        if args.task == "ser":
            records[doc.id] = PredictionRecord(doc.id, entities=tag_ser(doc, config))
        else:
            records[doc.id] = PredictionRecord(doc.id, relations=link_el(doc, None, config))
    preds = PredictionSet(task=args.task, records=records)
    target = Path(args.out)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(serialize_predictions(preds))
    print(f"wrote {target}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < MAX_SEED:
        raise argparse.ArgumentTypeError("seed must fit in unsigned 64 bits")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vrdeval",
        description="Evaluation harness for visually rich document information extraction.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_: str, split: bool = False, report: bool = False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--dataset", required=True, help="canonical file or split directory")
        if split:
            p.add_argument("--split", default=ALL_SPLIT)
        if report:
            p.add_argument("--out", default=None)
            p.add_argument("--format", choices=("json", "markdown"), default="json")
        p.set_defaults(func=func)
        return p

    add("validate", _cmd_validate, "check structural invariants")
    add("stats", _cmd_stats, "dataset statistics", split=True, report=True)

    p = add("import-funsd", _cmd_import_funsd, "convert FUNSD annotations to canonical files")
    p.add_argument("--out", required=True, help=".json file (single split) or directory")
    p.add_argument("--keep-invalid-links", action="store_true")
    p.add_argument("--relation-direction", choices=RELATION_DIRECTION_RULES,
                   default="question-to-answer")

    p = add("mask-segments", lambda a: _transform_command(a, "mask-segments"),
            "keep word-level layout only")
    p.add_argument("--out", required=True)

    p = add("perturb", lambda a: _transform_command(a, "perturb"),
            "seeded split/rotate/offset perturbation")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--split-rate", type=float, default=0.1)
    p.add_argument("--rot-min", type=float, default=-5.0)
    p.add_argument("--rot-max", type=float, default=5.0)
    p.add_argument("--sigma-min", type=float, default=5.0)
    p.add_argument("--sigma-max", type=float, default=20.0)

    add("diagnose", _cmd_diagnose, "layout-leakage diagnostics", split=True, report=True)
    add("fairness-subset", _cmd_fairness_subset, "complex-entity subset", split=True, report=True)

    p = add("eval-ser", _cmd_eval_ser, "score entity predictions", split=True, report=True)
    p.add_argument("--predictions", required=True)
    p = add("eval-el", _cmd_eval_el, "score relation predictions", split=True, report=True)
    p.add_argument("--predictions", required=True)
    p = add("fairness", _cmd_fairness, "recall on the complex subset", split=True, report=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--subset", default=None, help="subset file; default: computed")

    p = add("baseline", _cmd_baseline, "heuristic tagger/linker predictions", split=True)
    p.add_argument("--task", choices=("ser", "el"), required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--header-band", type=float, default=0.10)
    p.add_argument("--link-max-distance", type=float, default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SchemaError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScoringError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCORING
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CodecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


run = main
