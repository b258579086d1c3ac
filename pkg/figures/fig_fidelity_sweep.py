#!/usr/bin/env python3
"""Fidelity of the identified 1D direction versus swap probability, with the
63% and 95% noiseless-simulation bands shaded in red and blue.  Reads
sweep.csv and bands.csv; bands are drawn as stored, never recomputed."""

import argparse
import sys
from pathlib import Path

import matplotlib.pyplot as plt

import figstyle


def build(in_dir: Path, out_dir: Path) -> dict:
    points = figstyle.load_csv(
        in_dir / "sweep.csv", ["p", "pair_index", "fidelity_truth", "accepted"]
    )
    bands = figstyle.load_csv(in_dir / "bands.csv", ["p", "level", "lo", "hi"])

    by_level = {}
    for row in bands:
        by_level.setdefault(row["level"], []).append(row)
    for rows in by_level.values():
        rows.sort(key=lambda r: r["p"])

    figstyle.apply_style()
    fig, ax = plt.subplots()
    for level in sorted(by_level, reverse=True):  # wider band underneath
        rows = by_level[level]
        ax.fill_between(
            [r["p"] for r in rows],
            [r["lo"] for r in rows],
            [r["hi"] for r in rows],
            color=figstyle.BAND_COLORS.get(level, "gray"),
            alpha=0.35,
            label=f"{level:.0%} noiseless band",
        )
    ax.plot(
        [r["p"] for r in points],
        [r["fidelity_truth"] for r in points],
        ".",
        color=figstyle.POINT_COLOR,
        ms=4,
        alpha=0.6,
        label="trials",
    )
    ax.set_xlabel("swap probability")
    ax.set_ylabel("fidelity with the true 1D DFS")
    ax.set_ylim(-0.03, 1.03)
    ax.legend(loc="lower center", fontsize=8)

    # annotate the stored band edges at the grid point nearest complete decoherence
    anchor = min((r["p"] for r in bands), key=lambda p: abs(p - 0.5))
    edges = {
        f"band_{row['level']:.2f}": [row["lo"], row["hi"]]
        for row in bands
        if row["p"] == anchor
    }
    annotations = {"anchor_p": anchor, "points": len(points), **edges}
    figstyle.annotate_box(
        ax,
        [f"bands at p={anchor:g}:"]
        + [f"  {k.split('_')[1]}: [{v[0]:.4g}, {v[1]:.4g}]" for k, v in sorted(edges.items())],
    )
    figstyle.save_figure(fig, out_dir, "fidelity_sweep", annotations)
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
