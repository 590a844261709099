#!/usr/bin/env python3
"""Generate the synthetic stand-in dataset: a measurements CSV plus one
simulated feature CSV per extractor tag, in the pipeline's interchange
schema. Deterministic for a given seed."""

from __future__ import annotations

import argparse
from pathlib import Path

from eggq.presets import BACKBONE_DIMS, SELECTED_EXTRACTORS
from eggq.synthetic import write_feature_csvs


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("data"))
    parser.add_argument("--seed", type=int, default=20240101)
    parser.add_argument(
        "--extractors",
        nargs="+",
        default=list(SELECTED_EXTRACTORS),
        choices=sorted(BACKBONE_DIMS),
    )
    args = parser.parse_args()
    backbones = {tag: BACKBONE_DIMS[tag] for tag in args.extractors}
    paths = write_feature_csvs(args.out, backbones, seed=args.seed)
    for name, path in paths.items():
        print(f"{name}: {path}")


if __name__ == "__main__":
    main()
