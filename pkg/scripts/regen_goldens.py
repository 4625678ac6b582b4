#!/usr/bin/env python3
"""Regenerate the checked-in golden files from the fixture corpus.

Run after an intentional behavior change, then review the diff by hand:

    python3 scripts/regen_goldens.py
"""

from __future__ import annotations

import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "tests"))

from test_cli import GOLDEN_FILES, run_golden_pipeline  # noqa: E402


def main() -> None:
    golden_e2e = REPO / "tests" / "data" / "golden" / "e2e"
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        run_golden_pipeline(tmp_path)
        for name in GOLDEN_FILES:
            target = golden_e2e / name
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(tmp_path / name, target)
            print(f"regenerated {target.relative_to(REPO)}")

    # The importer golden keeps the fixture directory's own dataset name, so
    # it is generated directly rather than copied from the pipeline run.
    from vrdeval.codec import import_funsd, write_dataset

    imported_dir = REPO / "tests" / "data" / "golden" / "imported"
    write_dataset(import_funsd(REPO / "tests" / "data" / "funsd_fixture"), imported_dir)
    print(f"regenerated {(imported_dir / 'all.json').relative_to(REPO)}")


if __name__ == "__main__":
    main()
