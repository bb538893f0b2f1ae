#!/usr/bin/env python3
"""Fetch the real benchmark datasets and convert them to the package CSV format.

Downloads the original files from the UCI Machine Learning Repository and
rewrites them as numeric-features-plus-1-based-label CSVs under data/,
replacing the synthetic stand-ins.  Requires general network access, which
some sandboxes do not have; the rest of the package works identically on
the stand-ins.
"""

import argparse
import urllib.request
from pathlib import Path

BASE = "https://archive.ics.uci.edu/ml/machine-learning-databases"

# name -> (url, parser)
SOURCES = {
    "ecoli": f"{BASE}/ecoli/ecoli.data",
    "glass": f"{BASE}/glass/glass.data",
    "yeast": f"{BASE}/yeast/yeast.data",
    # vehicle ("statlog") ships as several whitespace files; fetched separately
    "vehicle": f"{BASE}/statlog/vehicle/xa%s.dat",
}


def _relabel(labels: list[str]) -> list[int]:
    seen: dict[str, int] = {}
    out = []
    for lab in labels:
        if lab not in seen:
            seen[lab] = len(seen) + 1
        out.append(seen[lab])
    return out


def _write(path: Path, rows: list[list[float]], labels: list[int]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for feats, lab in zip(rows, labels):
            fh.write(",".join(f"{v:.10g}" for v in feats) + f",{lab}\n")
    print(f"wrote {path} ({len(rows)} examples)")


def fetch_delimited(name: str, url: str, outdir: Path, drop_first: bool, sep: str | None):
    raw = urllib.request.urlopen(url).read().decode("utf-8")
    rows, labels = [], []
    for line in raw.splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split(sep) if sep else line.split()
        if drop_first:
            parts = parts[1:]
        rows.append([float(v) for v in parts[:-1]])
        labels.append(parts[-1])
    _write(outdir / f"{name}.csv", rows, _relabel(labels))


def fetch_vehicle(outdir: Path):
    rows, labels = [], []
    for letter in "abcdefghi":
        raw = urllib.request.urlopen(SOURCES["vehicle"] % letter).read().decode("utf-8")
        for line in raw.splitlines():
            parts = line.split()
            if not parts:
                continue
            rows.append([float(v) for v in parts[:-1]])
            labels.append(parts[-1])
    _write(outdir / "vehicle.csv", rows, _relabel(labels))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default=Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    fetch_delimited("ecoli", SOURCES["ecoli"], outdir, drop_first=True, sep=None)
    fetch_delimited("glass", SOURCES["glass"], outdir, drop_first=True, sep=",")
    fetch_delimited("yeast", SOURCES["yeast"], outdir, drop_first=True, sep=None)
    fetch_vehicle(outdir)


if __name__ == "__main__":
    main()
