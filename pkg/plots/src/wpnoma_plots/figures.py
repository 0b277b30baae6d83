"""Figure construction for the four sweep CSVs.

Each figure kind matches one experiment CSV schema (validated against the
exact header the sweeps write).  Data is plotted as parsed: no sorting, no
fill-in, no renormalization.  Undefined radii arrive as empty cells, parse
to NaN, and NaN vertices break the plotted line instead of dropping to
zero.  Style is pinned so that rendering the same CSV twice produces
byte-identical image files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("radius", "pmf", "throughput", "ablation")

# Exact column sets of the sweep CSVs; order matters.
EXPECTED_COLUMNS = {
    "radius": (
        "lambda_B", "T", "radius_paper_km", "radius_corrected_km",
        "radius_exact_km", "paper_radicand",
    ),
    "pmf": (
        "lambda_B", "T", "radius_km", "n", "pmf_analytic", "pmf_empirical",
        "tv_distance", "analytic_tail_mass", "overlap_probability",
        "overlap_stderr", "trials",
    ),
    "throughput": (
        "row_kind", "lambda_B", "T", "radius_km", "rts_analytic_linear",
        "rts_analytic_log", "rtc_analytic_log", "rts_empirical",
        "rts_empirical_stderr", "rtc_empirical", "rtc_empirical_stderr",
        "lambda_B_active_empirical", "mean_i_inter",
    ),
    "ablation": (
        "lambda_B", "T", "radius_km", "rts_with", "rts_with_stderr",
        "rts_without", "rts_without_stderr", "ratio_without_over_with",
    ),
}

# Pinned style: fixed fonts drawn as outlines and a fixed SVG hash salt so
# repeated renders of the same spec are byte-identical.
STYLE = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "axes.grid": True,
    "grid.alpha": 0.35,
    "grid.linewidth": 0.6,
    "legend.fontsize": 8.0,
    "lines.linewidth": 1.4,
    "lines.markersize": 4.5,
    "errorbar.capsize": 2.0,
    "svg.hashsalt": "wpnoma-plots",
    "svg.fonttype": "path",
    "path.simplify": False,
}

# label -> (x, y) arrays exactly as handed to matplotlib
SeriesMap = Dict[str, Tuple[np.ndarray, np.ndarray]]


class SchemaMismatch(ValueError):
    """CSV header does not match the expected column set for the kind."""


class EmptyInput(ValueError):
    """CSV is missing, header-only, or otherwise carries no data rows."""


@dataclass(frozen=True)
class FigureSpec:
    """One figure request: which CSV, which layout, where to write it."""

    input_csv: Path
    kind: str
    output: Path
    log_y: bool = False
    legend_loc: str = "best"
    dpi: int = 150

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}; expected one of {', '.join(KINDS)}"
            )
        suffix = Path(self.output).suffix.lower()
        if suffix not in (".png", ".svg"):
            raise ValueError(f"output must end in .png or .svg, got {suffix!r}")


@dataclass
class Table:
    """A parsed sweep CSV: header plus raw string cells, column access."""

    columns: Tuple[str, ...]
    cells: List[List[str]]

    def raw(self, name: str) -> List[str]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.cells]

    def floats(self, name: str) -> np.ndarray:
        # empty cell = undefined value = NaN, never zero
        return np.array(
            [float(c) if c != "" else np.nan for c in self.raw(name)], dtype=float
        )


def load_table(path, kind: str) -> Table:
    """Read and validate one sweep CSV.

    Raises SchemaMismatch when the header (or a ragged row) disagrees with
    the kind's column set, EmptyInput when there is nothing to plot.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown figure kind {kind!r}")
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise EmptyInput(f"{path}: no header row")
    expected = EXPECTED_COLUMNS[kind]
    header = tuple(rows[0])
    if header != expected:
        raise SchemaMismatch(
            f"{path}: expected columns {','.join(expected)} for kind "
            f"{kind!r}, got {','.join(header)}"
        )
    body = rows[1:]
    if not body:
        raise EmptyInput(f"{path}: header only, no data rows")
    for i, row in enumerate(body, start=2):
        if len(row) != len(expected):
            raise SchemaMismatch(
                f"{path}: line {i} has {len(row)} cells, expected {len(expected)}"
            )
    return Table(header, body)


def _unique(values: np.ndarray) -> List[float]:
    """Distinct values in first-appearance order (no sorting)."""
    return list(dict.fromkeys(values.tolist()))


def _finish(ax, spec: FigureSpec) -> None:
    if spec.log_y:
        ax.set_yscale("log")
    handles, _ = ax.get_legend_handles_labels()
    if handles:
        ax.legend(loc=spec.legend_loc)


_RADIUS_SERIES = (
    ("paper", "radius_paper_km", "o", "-"),
    ("corrected", "radius_corrected_km", "s", "--"),
    ("exact", "radius_exact_km", "^", ":"),
)


def _radius_figure(tab: Table, spec: FigureSpec):
    fig, ax = plt.subplots()
    lam = tab.floats("lambda_B")
    tcol = tab.floats("T")
    series: SeriesMap = {}
    for mode, col, marker, ls in _RADIUS_SERIES:
        y = tab.floats(col)
        for t in _unique(tcol):
            m = tcol == t
            label = f"{mode}, T={t:g}"
            ax.plot(lam[m], y[m], marker=marker, linestyle=ls, label=label)
            series[label] = (lam[m], y[m])
    ax.set_xlabel("lambda_B (1/km^2)")
    ax.set_ylabel("selection radius (km)")
    _finish(ax, spec)
    fig.tight_layout()
    return fig, series


def _pmf_figure(tab: Table, spec: FigureSpec):
    lam = tab.floats("lambda_B")
    tcol = tab.floats("T")
    n_all = tab.floats("n")
    pa = tab.floats("pmf_analytic")
    pe = tab.floats("pmf_empirical")
    keys = list(dict.fromkeys(zip(lam.tolist(), tcol.tolist())))
    fig, axes = plt.subplots(
        1, len(keys), figsize=(4.0 * len(keys) + 0.8, 3.6),
        squeeze=False, sharey=True,
    )
    series: SeriesMap = {}
    for ax, (lb, t) in zip(axes[0], keys):
        m = (lam == lb) & (tcol == t)
        n = n_all[m]
        # paired bars, spacing from the n grid itself
        w = 0.4 * float(np.min(np.diff(np.sort(n)))) if n.size > 1 else 0.4
        ax.bar(n - w / 2, pa[m], width=w, label="analytic")
        ax.bar(n + w / 2, pe[m], width=w, label="empirical")
        series[f"lambda_B={lb:g}, T={t:g}, analytic"] = (n, pa[m])
        series[f"lambda_B={lb:g}, T={t:g}, empirical"] = (n, pe[m])
        ax.set_title(f"lambda_B={lb:g}, T={t:g}")
        ax.set_xlabel("n")
        if spec.log_y:
            ax.set_yscale("log")
    axes[0][0].set_ylabel("P(N = n)")
    axes[0][0].legend(loc=spec.legend_loc)
    fig.tight_layout()
    return fig, series


def _throughput_figure(tab: Table, spec: FigureSpec):
    fig, ax = plt.subplots()
    row_kind = np.array(tab.raw("row_kind"))
    lam = tab.floats("lambda_B")
    tcol = tab.floats("T")
    emp = tab.floats("rts_empirical")
    err = tab.floats("rts_empirical_stderr")
    ana = tab.floats("rts_analytic_log")
    grid = row_kind == "grid"
    opt = row_kind == "optimum"
    series: SeriesMap = {}
    for lb in _unique(lam[grid]):
        m = grid & (lam == lb)
        label = f"lambda_B={lb:g} empirical"
        ax.errorbar(tcol[m], emp[m], yerr=err[m], marker="o", label=label)
        series[label] = (tcol[m], emp[m])
        label = f"lambda_B={lb:g} analytic"
        ax.plot(tcol[m], ana[m], linestyle="--", label=label)
        series[label] = (tcol[m], ana[m])
    for lb in _unique(lam[opt]):
        m = opt & (lam == lb)
        label = f"lambda_B={lb:g} optimum"
        ax.plot(
            tcol[m], emp[m], linestyle="none", marker="*", markersize=11.0,
            label=label,
        )
        series[label] = (tcol[m], emp[m])
    ax.set_xlabel("T")
    ax.set_ylabel("system throughput (bits/s/Hz/km^2)")
    _finish(ax, spec)
    fig.tight_layout()
    return fig, series


def _ablation_figure(tab: Table, spec: FigureSpec):
    fig, ax = plt.subplots()
    lam = tab.floats("lambda_B")
    tcol = tab.floats("T")
    with_y = tab.floats("rts_with")
    with_e = tab.floats("rts_with_stderr")
    wo_y = tab.floats("rts_without")
    wo_e = tab.floats("rts_without_stderr")
    series: SeriesMap = {}
    for lb in _unique(lam):
        m = lam == lb
        label = f"lambda_B={lb:g} with interference"
        ax.errorbar(tcol[m], with_y[m], yerr=with_e[m], marker="o", label=label)
        series[label] = (tcol[m], with_y[m])
        label = f"lambda_B={lb:g} no interference"
        ax.errorbar(
            tcol[m], wo_y[m], yerr=wo_e[m], marker="s", linestyle="--",
            label=label,
        )
        series[label] = (tcol[m], wo_y[m])
    ax.set_xlabel("T")
    ax.set_ylabel("system throughput (bits/s/Hz/km^2)")
    _finish(ax, spec)
    fig.tight_layout()
    return fig, series


_BUILDERS = {
    "radius": _radius_figure,
    "pmf": _pmf_figure,
    "throughput": _throughput_figure,
    "ablation": _ablation_figure,
}


def build_figure(spec: FigureSpec):
    """Build the matplotlib figure for a spec.

    Returns (figure, series) where series maps each plotted label to the
    (x, y) arrays exactly as handed to matplotlib; tests use it to verify
    the figure's data layer round-trips to the CSV.  The caller owns the
    figure (close it when done).
    """
    tab = load_table(spec.input_csv, spec.kind)
    with matplotlib.rc_context(STYLE):
        fig, series = _BUILDERS[spec.kind](tab, spec)
    return fig, series


def render(spec: FigureSpec) -> Tuple[Path, Path]:
    """Render a spec to disk; returns (raster_path, vector_path).

    Always writes both a PNG and an SVG sibling of spec.output, whichever
    suffix was requested.
    """
    fig, _ = build_figure(spec)
    try:
        out = Path(spec.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        raster = out.with_suffix(".png")
        vector = out.with_suffix(".svg")
        with matplotlib.rc_context(STYLE):
            fig.savefig(raster, dpi=spec.dpi)
            # Date metadata is the only varying SVG field; drop it.
            fig.savefig(vector, metadata={"Date": None})
    finally:
        plt.close(fig)
    return raster, vector
