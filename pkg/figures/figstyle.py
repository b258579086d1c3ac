"""Shared styling, schema-checked CSV loading and deterministic figure output.

Every figure script reads harness CSV/JSON files, draws, and writes PNG +
SVG plus a small ``<name>.annotations.json`` carrying the numbers that were
annotated onto the figure.  Annotations are always values read from the
input files, never recomputed statistics, so tests can compare them against
the CSVs directly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# band shading follows the reference figure convention: 63% red, 95% blue
BAND_COLORS = {0.63: "tab:red", 0.95: "tab:blue"}
POINT_COLOR = "black"
DIAGONAL_COLOR = "green"
ACCEPT_COLOR = "tab:green"
REJECT_COLOR = "tab:red"


class SchemaError(Exception):
    """Input file missing, empty, or lacking required columns."""


def apply_style():
    plt.rcParams.update(
        {
            "figure.figsize": (7.0, 4.5),
            "figure.dpi": 110,
            "savefig.dpi": 110,
            "font.size": 10,
            "axes.grid": True,
            "grid.alpha": 0.3,
            "svg.hashsalt": "dfs-scout-figures",
        }
    )


def load_csv(path: Path, required: list[str]) -> list[dict]:
    """Read a harness CSV (comment line, header, rows) into typed dicts."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    if not lines:
        raise SchemaError(f"{path} has no header row")
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path} is missing columns {missing}")
    rows = []
    for raw in reader:
        row = {}
        for key, value in raw.items():
            if value is None:
                raise SchemaError(f"{path} has a ragged row")
            if value in ("true", "false"):
                row[key] = value == "true"
            else:
                try:
                    row[key] = float(value)
                except ValueError:
                    row[key] = value
        rows.append(row)
    if not rows:
        raise SchemaError(f"{path} has no data rows")
    return rows


def load_json(path: Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"missing input file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def annotate_box(ax, lines: list[str]):
    ax.text(
        0.02,
        0.02,
        "\n".join(lines),
        transform=ax.transAxes,
        fontsize=8,
        verticalalignment="bottom",
        bbox={"boxstyle": "round", "facecolor": "white", "alpha": 0.8},
    )


def save_figure(fig, out_dir: Path, name: str, annotations: dict) -> dict:
    """Write PNG, SVG and the annotation sidecar; deterministic given inputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = {}
    for ext in ("png", "svg"):
        target = out_dir / f"{name}.{ext}"
        fig.savefig(target, metadata={"Date": None} if ext == "svg" else None)
        written[ext] = str(target)
    sidecar = out_dir / f"{name}.annotations.json"
    sidecar.write_text(json.dumps(annotations, sort_keys=True, indent=2) + "\n")
    written["annotations"] = str(sidecar)
    plt.close(fig)
    return written
