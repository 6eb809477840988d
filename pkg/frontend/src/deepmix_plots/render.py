"""Render the three figure kinds from result CSVs.

The renderer never recomputes physics: every plotted value exists
verbatim in the input CSV. Output is deterministic for fixed input bytes;
SVG is the preferred format (no timestamps, fixed hash salt for element
ids).

Expected schemas:

    fig1b     s2,k,delta_k
    dynamics  t,k,b_size,delta_mean,delta_stderr,n   (aggregated table)
    selfdual  t,k,b_size,delta_k,plateau_onset
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SCHEMAS = {
    "fig1b": ("s2", "k", "delta_k"),
    "dynamics": ("t", "k", "b_size", "delta_mean", "delta_stderr", "n"),
    "selfdual": ("t", "k", "b_size", "delta_k", "plateau_onset"),
}

_BASE_COLORS = ["#1f4e79", "#a63603", "#276419", "#54278f", "#7f2704"]


class SchemaError(ValueError):
    """Input CSV does not match the schema of the requested figure kind."""


@dataclass
class PlotSpec:
    kind: str
    csv_path: Path
    out_path: Path
    logy: bool | None = None  # default: log for distance-vs-time panels
    title: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in SCHEMAS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r}; expected one of {sorted(SCHEMAS)}"
            )
        self.csv_path = Path(self.csv_path)
        self.out_path = Path(self.out_path)


def read_rows(kind: str, path: Path) -> list[dict]:
    schema = SCHEMAS[kind]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty; expected header {','.join(schema)}")
        if tuple(header) != schema:
            missing = [c for c in schema if c not in header]
            extra = [c for c in header if c not in schema]
            offending = (missing + extra or header)[0]
            raise SchemaError(
                f"{path} does not match the '{kind}' schema "
                f"{','.join(schema)}: offending column '{offending}'"
            )
        rows = []
        for raw in reader:
            if not raw:
                continue
            rows.append({name: float(value) for name, value in zip(schema, raw)})
        return rows


def _style() -> None:
    plt.rcParams.update(
        {
            "svg.hashsalt": "deepmix-plots",
            "figure.figsize": (6.0, 4.0),
            "figure.dpi": 120,
            "axes.grid": True,
            "grid.alpha": 0.3,
            "font.size": 10,
        }
    )


def _shade(base: str, rank: int, total: int) -> tuple:
    """Lighten a base color; higher rank (larger |B|) stays darker."""
    r, g, b = matplotlib.colors.to_rgb(base)
    if total <= 1:
        return (r, g, b)
    fade = 0.65 * (total - 1 - rank) / (total - 1)
    return tuple(c + (1.0 - c) * fade for c in (r, g, b))


def _finish(fig, ax, spec: PlotSpec, ylabel: str, xlabel: str, logy: bool) -> None:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if logy and ax.lines:
        ax.set_yscale("log")
    if any(line.get_label() and not line.get_label().startswith("_") for line in ax.lines):
        ax.legend(fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    savefig_kwargs = {}
    if spec.out_path.suffix.lower() == ".svg":
        savefig_kwargs["metadata"] = {"Date": None}
    fig.savefig(spec.out_path, **savefig_kwargs)
    plt.close(fig)


def _render_fig1b(spec: PlotSpec, rows: list[dict]) -> None:
    fig, ax = plt.subplots()
    ks = sorted({int(r["k"]) for r in rows})
    for i, k in enumerate(ks):
        pts = sorted(
            [(r["s2"], r["delta_k"]) for r in rows if int(r["k"]) == k]
        )
        ax.plot(
            [p[0] for p in pts],
            [p[1] for p in pts],
            marker="o",
            markersize=3,
            color=_BASE_COLORS[i % len(_BASE_COLORS)],
            label=f"k = {k}",
        )
    logy = bool(spec.logy) if spec.logy is not None else False
    _finish(fig, ax, spec, "distance to Haar moments", "second Renyi entropy", logy)


def _render_time_series(
    spec: PlotSpec, rows: list[dict], value_col: str
) -> None:
    fig, ax = plt.subplots()
    ks = sorted({int(r["k"]) for r in rows})
    bs = sorted({int(r["b_size"]) for r in rows})
    for i, k in enumerate(ks):
        base = _BASE_COLORS[i % len(_BASE_COLORS)]
        for j, b in enumerate(bs):
            pts = sorted(
                (r["t"], r[value_col])
                for r in rows
                if int(r["k"]) == k and int(r["b_size"]) == b
            )
            if not pts:
                continue
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                marker="o",
                markersize=3,
                color=_shade(base, j, len(bs)),
                label=f"k = {k}, |B| = {b}",
            )
    if spec.kind == "selfdual":
        onsets = [r["t"] for r in rows if r["plateau_onset"] >= 1.0]
        if onsets:
            ax.axvline(min(onsets), color="black", linestyle="--", linewidth=1)
    logy = bool(spec.logy) if spec.logy is not None else True
    _finish(fig, ax, spec, "moment distance", "time", logy)


def render(spec: PlotSpec) -> Path:
    """Render one figure; returns the output path."""
    rows = read_rows(spec.kind, spec.csv_path)
    _style()
    if spec.kind == "fig1b":
        _render_fig1b(spec, rows)
    elif spec.kind == "dynamics":
        _render_time_series(spec, rows, "delta_mean")
    else:
        _render_time_series(spec, rows, "delta_k")
    return spec.out_path
