#!/usr/bin/env python3
"""Run the full pipeline on an externally provided EEG dataset.

The dataset directory must contain one CSV per subject (columns = channels,
one header row) plus labels.csv with subject_id,label rows (1 = patient).
Defaults mirror the published configuration: 128 Hz, 0.5-50 Hz band, the six
frontal/central channels, 4 s windows, m=2/tau=10, k=350, keep 140.
"""

import argparse
import sys

from topofeat.config import PipelineConfig
from topofeat.pipeline import run_pipeline


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--input", required=True, help="dataset directory")
    ap.add_argument("--out", default="out_external")
    ap.add_argument("--channels", default="Fz,F8,F3,C4,C3,F7")
    ap.add_argument("--rate", type=float, default=128.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--grid-search", action="store_true")
    args = ap.parse_args()

    cfg = PipelineConfig(input_dir=args.input, out_dir=args.out, rate=args.rate,
                         channels=args.channels, seed=args.seed, jobs=args.jobs,
                         grid_search=args.grid_search)
    report = run_pipeline(cfg)
    print(f"acc={report.acc:.4f} se={report.se:.4f} sp={report.sp:.4f}")
    print("reference result: acc=0.8560 sp=0.8833 se=0.8361")
    return 0


if __name__ == "__main__":
    sys.exit(main())
