"""Render a family of sensitivity curves from simulator sweep CSVs.

One curve per input file; the legend label is taken from the family field
of each file's embedded config header.  Output is deterministic for fixed
inputs: fixed style table, fixed SVG hash salt, no timestamps.

Usage: ``plot_family --spec figure.json`` where the spec document holds
``inputs`` (list of CSV paths), ``family_field`` (config key used for the
legend), optional ``x_scale``/``y_scale`` (linear|log), and ``output``
(image path ending in .svg or .png).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SWEEP_COLUMNS = (
    "swept_name",
    "swept_value",
    "P_perturbed",
    "P_unperturbed",
    "S",
    "converged",
)

# Fixed house style: solid perturbed curves cycling through a small
# palette; unperturbed baselines, when drawn, are dashed blue.
PALETTE = ["#2ca02c", "#1f77b4", "#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"]
BASELINE_STYLE = {"color": "#1f77b4", "linestyle": "--"}
SVG_HASH_SALT = "cavityprobe-figures"


class SchemaMismatch(Exception):
    """An input CSV does not carry the sweep schema; names the column."""


class EmptyInput(Exception):
    """An input CSV has a valid header but no data rows."""


@dataclass(frozen=True)
class FigureSpec:
    inputs: List[str]
    family_field: str
    output: str
    x_scale: str = "linear"
    y_scale: str = "log"

    def __post_init__(self):
        for name, scale in (("x_scale", self.x_scale), ("y_scale", self.y_scale)):
            if scale not in ("linear", "log"):
                raise ValueError(f"{name} must be linear or log, got {scale!r}")
        if not self.inputs:
            raise EmptyInput("figure spec lists no input CSVs")

    @classmethod
    def from_json(cls, path: str) -> "FigureSpec":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(
            inputs=list(doc["inputs"]),
            family_field=doc["family_field"],
            output=doc["output"],
            x_scale=doc.get("x_scale", "linear"),
            y_scale=doc.get("y_scale", "log"),
        )


@dataclass(frozen=True)
class SweepTable:
    """Parsed sweep CSV: embedded config plus data columns."""

    config: dict
    swept_name: str
    rows: tuple = field(repr=False)

    @property
    def swept_values(self):
        return [r[1] for r in self.rows]

    @property
    def sensitivities(self):
        return [r[4] for r in self.rows]

    def data_section(self) -> str:
        """Re-serialize header row plus data rows, matching the CLI bytes."""
        lines = [",".join(SWEEP_COLUMNS)]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        r[0],
                        _fmt(r[1]),
                        _fmt(r[2]),
                        _fmt(r[3]),
                        _fmt(r[4]),
                        "true" if r[5] else "false",
                    ]
                )
            )
        return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def read_sweep_csv(path: str) -> SweepTable:
    """Parse one sweep/spectrum CSV, validating the schema exactly."""
    config: Optional[dict] = None
    header_seen = False
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# config: "):
                config = json.loads(line[len("# config: ") :])
                continue
            if line.startswith("#") or not line.strip():
                continue
            cells = line.split(",")
            if not header_seen:
                for got, want in zip(cells, SWEEP_COLUMNS):
                    if got != want:
                        raise SchemaMismatch(
                            f"{path}: expected column {want!r}, found {got!r}"
                        )
                if len(cells) != len(SWEEP_COLUMNS):
                    raise SchemaMismatch(
                        f"{path}: expected {len(SWEEP_COLUMNS)} columns, "
                        f"found {len(cells)}"
                    )
                header_seen = True
                continue
            if cells[5].startswith("error:"):
                rows.append(
                    (cells[0], float(cells[1]), float("nan"), float("nan"),
                     float("nan"), False)
                )
                continue
            rows.append(
                (
                    cells[0],
                    float(cells[1]),
                    float(cells[2]),
                    float(cells[3]),
                    float(cells[4]),
                    cells[5] == "true",
                )
            )
    if not header_seen:
        raise SchemaMismatch(f"{path}: no sweep header row found")
    if not rows:
        raise EmptyInput(f"{path}: no data rows")
    if config is None:
        config = {}
    return SweepTable(config=config, swept_name=rows[0][0], rows=tuple(rows))


def _family_label(table: SweepTable, family_field: str, path: str) -> str:
    if family_field not in table.config:
        raise SchemaMismatch(
            f"{path}: family field {family_field!r} missing from config header"
        )
    value = table.config[family_field]
    return f"{family_field}={value:g}" if isinstance(value, float) else (
        f"{family_field}={value}"
    )


def plot_family(spec: FigureSpec):
    """Render one curve per input CSV; returns the matplotlib figure."""
    tables = [read_sweep_csv(p) for p in spec.inputs]
    labels = [
        _family_label(t, spec.family_field, p) for t, p in zip(tables, spec.inputs)
    ]

    plt.rcParams["svg.hashsalt"] = SVG_HASH_SALT
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, (table, label) in enumerate(zip(tables, labels)):
        ax.plot(
            table.swept_values,
            table.sensitivities,
            color=PALETTE[i % len(PALETTE)],
            linestyle="-",
            label=label,
        )
    ax.set_xscale(spec.x_scale)
    ax.set_yscale(spec.y_scale)
    ax.set_xlabel(tables[0].swept_name)
    ax.set_ylabel("relative sensitivity S")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(spec.output, metadata=_clean_metadata(spec.output))
    return fig


def _clean_metadata(output: str) -> dict:
    if output.endswith(".svg"):
        return {"Date": None}
    if output.endswith(".png"):
        return {"Software": None}
    return {}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot_family", description=__doc__.splitlines()[0]
    )
    parser.add_argument("--spec", required=True, help="figure spec JSON path")
    args = parser.parse_args(argv)
    try:
        spec = FigureSpec.from_json(args.spec)
        plot_family(spec)
    except (SchemaMismatch, EmptyInput, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"plot_family: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
