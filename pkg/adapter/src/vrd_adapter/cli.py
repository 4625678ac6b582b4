"""Standalone entry point: canonical dataset in, canonical predictions out."""

from __future__ import annotations

import argparse
import sys

from .infer import LAYOUT_MODES, TASKS, AdapterConfig, infer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vrd-adapter",
        description="Run a pretrained text-and-layout model over a canonical "
        "dataset file and emit a canonical prediction file.",
    )
    parser.add_argument("--model", required=True, help="model path or hub id")
    parser.add_argument("--task", choices=TASKS, default="ser")
    parser.add_argument("--layout-mode", choices=LAYOUT_MODES, default="segment")
    parser.add_argument("--dataset", required=True, help="canonical dataset file")
    parser.add_argument("--out", required=True, help="prediction file to write")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-seq-len", type=int, default=512)
    parser.add_argument("--head-seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = AdapterConfig(
        model=args.model,
        task=args.task,
        layout_mode=args.layout_mode,
        device=args.device,
        max_seq_len=args.max_seq_len,
        head_seed=args.head_seed,
    )
    try:
        path = infer(config, args.dataset, args.out)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0
