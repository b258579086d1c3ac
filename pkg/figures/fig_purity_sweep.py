#!/usr/bin/env python3
"""Average output purity of the protocol-identified 3D subspace versus swap
probability, against the whole-space separable baseline.  Reads purity.csv."""

import argparse
import sys
from pathlib import Path

import matplotlib.pyplot as plt

import figstyle


def build(in_dir: Path, out_dir: Path) -> dict:
    rows = figstyle.load_csv(
        in_dir / "purity.csv", ["p", "dfs_dim", "dfs_purity", "baseline_purity"]
    )
    rows.sort(key=lambda r: r["p"])

    figstyle.apply_style()
    fig, ax = plt.subplots()
    ps = [r["p"] for r in rows]
    ax.plot(ps, [r["dfs_purity"] for r in rows], "o-", color="tab:blue",
            label="identified 3D subspace")
    ax.plot(ps, [r["baseline_purity"] for r in rows], "s--", color="tab:orange",
            label="separable baseline (full space)")
    ax.set_xlabel("swap probability")
    ax.set_ylabel("average output purity")
    ax.set_ylim(0.5, 1.05)
    ax.legend(loc="lower left", fontsize=8)

    anchor_row = min(rows, key=lambda r: abs(r["p"] - 0.51))
    annotations = {
        "anchor_p": anchor_row["p"],
        "dfs_purity": anchor_row["dfs_purity"],
        "baseline_purity": anchor_row["baseline_purity"],
        "points": len(rows),
    }
    figstyle.annotate_box(
        ax,
        [
            f"at p={annotations['anchor_p']:g}:",
            f"  subspace purity {annotations['dfs_purity']:.4g}",
            f"  baseline purity {annotations['baseline_purity']:.4g}",
        ],
    )
    figstyle.save_figure(fig, out_dir, "purity_sweep", annotations)
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
