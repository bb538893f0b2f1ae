#!/usr/bin/env python3
"""Regenerate the synthetic stand-in datasets under data/.

The files are deterministic for a given seed, so running this script
reproduces the committed CSVs byte for byte.
"""

import argparse
from pathlib import Path

from banditope.datasets import DATASET_SHAPES, synthetic_dataset, write_dataset_csv


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default=Path(__file__).resolve().parent.parent / "data")
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in sorted(DATASET_SHAPES):
        path = outdir / f"{name}.csv"
        write_dataset_csv(synthetic_dataset(name, seed=args.seed), path)
        n, d, k = DATASET_SHAPES[name]
        print(f"wrote {path} ({n} examples, {d} features, {k} classes)")


if __name__ == "__main__":
    main()
