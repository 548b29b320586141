#!/usr/bin/env python3
"""Weighting-function sweep over (plateau, junction) on existing pipeline artifacts.

Expects an out directory whose filter stage has run (subject_diagrams/ present);
prints one ACC/SE/SP row per parameter pair and writes a JSON table.
"""

import argparse
import json
import sys
from pathlib import Path

from topofeat.config import PipelineConfig
from topofeat.pipeline import sweep_weights


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="pipeline artifact directory")
    ap.add_argument("--plateau-values", default="0,1")
    ap.add_argument("--junction-values", default="1,3")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--table", default=None)
    args = ap.parse_args()

    cfg = PipelineConfig(out_dir=args.out, seed=args.seed, folds=args.folds)
    grid = sweep_weights(cfg,
                         [float(v) for v in args.plateau_values.split(",")],
                         [float(v) for v in args.junction_values.split(",")])
    for row in grid:
        print(f"plateau={row['plateau']:g} junction={row['junction']:g}: "
              f"acc={row['acc']:.4f} se={row['se']:.4f} sp={row['sp']:.4f}")
    if args.table:
        Path(args.table).write_text(json.dumps(grid, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
