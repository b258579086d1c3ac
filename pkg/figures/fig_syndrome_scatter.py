#!/usr/bin/env python3
"""Largest versus second-largest cross-trial eigenvector fidelity for every
pair, colored by syndrome verdict, with the equal-fidelity diagonal.  Points
near the diagonal are the untrustworthy trials.  Reads dfs_components.csv."""

import argparse
import sys
from pathlib import Path

import matplotlib.pyplot as plt

import figstyle


def build(in_dir: Path, out_dir: Path) -> dict:
    rows = figstyle.load_csv(
        in_dir / "dfs_components.csv", ["pair_index", "f_largest", "f_second", "accepted"]
    )

    figstyle.apply_style()
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    accepted = [r for r in rows if r["accepted"]]
    rejected = [r for r in rows if not r["accepted"]]
    ax.plot([0, 1], [0, 1], "-", color=figstyle.DIAGONAL_COLOR, lw=1.5,
            label="equal fidelities")
    if rejected:
        ax.plot([r["f_second"] for r in rejected], [r["f_largest"] for r in rejected],
                "o", color=figstyle.REJECT_COLOR, ms=5, alpha=0.8, label="rejected")
    if accepted:
        ax.plot([r["f_second"] for r in accepted], [r["f_largest"] for r in accepted],
                "o", color=figstyle.ACCEPT_COLOR, ms=5, alpha=0.8, label="accepted")
    ax.set_xlabel("second-largest pair fidelity")
    ax.set_ylabel("largest pair fidelity")
    ax.set_xlim(-0.03, 1.03)
    ax.set_ylim(-0.03, 1.03)
    ax.set_aspect("equal")
    ax.legend(loc="lower right", fontsize=8)

    annotations = {
        "pairs": len(rows),
        "accepted": len(accepted),
        "rejected": len(rejected),
    }
    figstyle.annotate_box(
        ax,
        [f"accepted: {annotations['accepted']}", f"rejected: {annotations['rejected']}"],
    )
    figstyle.save_figure(fig, out_dir, "syndrome_scatter", annotations)
    return annotations


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--in", dest="in_dir", required=True, help="harness output directory")
    parser.add_argument("--out", dest="out_dir", required=True, help="image output directory")
    args = parser.parse_args(argv)
    try:
        build(Path(args.in_dir), Path(args.out_dir))
    except figstyle.SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
