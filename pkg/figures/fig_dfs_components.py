#!/usr/bin/env python3
"""Per-pair components of the reconstructed 1D decoherence-free direction:
one line per trial pair, amplitudes in the left panel and relative phases in
the right panel.  Reads dfs_components.csv and result.json."""

import argparse
import sys
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np

import figstyle


def build(in_dir: Path, out_dir: Path) -> dict:
    rows = figstyle.load_csv(
        in_dir / "dfs_components.csv",
        ["pair_index", "amp_0", "amp_1", "amp_2", "amp_3",
         "phase_0", "phase_1", "phase_2", "phase_3", "truth_fidelity"],
    )
    result = figstyle.load_json(in_dir / "result.json")

    figstyle.apply_style()
    fig, (ax_amp, ax_phase) = plt.subplots(1, 2, figsize=(9, 4))
    components = np.arange(4)
    for row in rows:
        amps = [row[f"amp_{k}"] for k in range(4)]
        phases = [row[f"phase_{k}"] for k in range(4)]
        if any(isinstance(a, str) for a in amps):
            continue
        color = plt.cm.viridis(row["pair_index"] / max(len(rows) - 1, 1))
        ax_amp.plot(components, amps, marker="o", lw=0.8, ms=3, color=color, alpha=0.7)
        ax_phase.plot(components, phases, marker="o", lw=0.8, ms=3, color=color, alpha=0.7)

    best = result.get("best_pair") or {}
    if best.get("amplitudes"):
        ax_amp.plot(components, best["amplitudes"], "k--", lw=2, label="best pair")
        ax_phase.plot(components, best["phases"], "k--", lw=2, label="best pair")
        ax_amp.legend(loc="upper right", fontsize=8)

    ax_amp.set_xlabel("component")
    ax_amp.set_ylabel("amplitude")
    ax_amp.set_title("a) amplitudes")
    ax_amp.set_xticks(components)
    ax_phase.set_xlabel("component")
    ax_phase.set_ylabel("phase (rad)")
    ax_phase.set_title("b) phases")
    ax_phase.set_xticks(components)

    annotations = {
        "pairs": len(rows),
        "best_pair_f_largest": best.get("f_largest"),
        "best_pair_truth_fidelity": best.get("truth_fidelity"),
    }
    figstyle.annotate_box(
        ax_amp,
        [
            f"pairs: {annotations['pairs']}",
            f"best-pair truth fidelity: {annotations['best_pair_truth_fidelity']}",
        ],
    )
    figstyle.save_figure(fig, out_dir, "dfs_components", annotations)
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
