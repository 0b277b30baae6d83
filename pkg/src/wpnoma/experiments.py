"""Parameter sweeps pairing the analytic and Monte Carlo pipelines.

Each experiment produces one CSV (columns documented on the experiment
function) plus a JSON manifest holding the fully resolved spec, seed,
package version, and wall-clock time, so every figure is regenerable
from artifacts alone.  CSV bytes are deterministic for a fixed spec and
seed: all randomness flows from the master seed through fixed stream
keys, rows are emitted in sweep order, and floats are rendered with a
fixed %.12g format.  Undefined radii serialize as empty cells.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .analysis import (
    RadiusMode,
    RateMode,
    SelectionRadius,
    AllUndefined,
    cell_throughput,
    optimal_T,
    pmf_vector,
    selection_radius,
    system_throughput,
)
from .geometry import DEFAULT_POINT_BUDGET
from .montecarlo import RadiusCircle, overlap_probability, run_campaign
from .params import SystemParams

DEFAULT_T_GRID: tuple[float, ...] = tuple(i / 100.0 for i in range(1, 96))
DEFAULT_RADIUS_TS: tuple[float, ...] = (0.01, 0.05, 0.15)
DEFAULT_RADIUS_LAMBDAS: tuple[float, ...] = tuple(float(x) for x in range(20, 41, 2))
DEFAULT_PMF_LAMBDAS: tuple[float, ...] = (20.0, 30.0, 40.0)
DEFAULT_THROUGHPUT_LAMBDAS: tuple[float, ...] = (20.0, 30.0, 40.0)
DEFAULT_ABLATION_LAMBDAS: tuple[float, ...] = (30.0,)

_EXPERIMENT_IDS = {"radius": 0, "pmf": 1, "throughput": 2, "ablation": 3}


@dataclass(frozen=True)
class SweepSpec:
    """Fully resolved description of one experiment run."""

    experiment: str
    base: SystemParams
    lambda_values: tuple[float, ...]
    t_values: tuple[float, ...]
    radius_mode: Optional[RadiusMode] = None  # None picks the experiment's default
    rate_mode: RateMode = RateMode.LogSumRate
    trials: int = 50_000
    master_seed: int = 0
    threads: int = 1
    output_dir: str = "."
    point_budget: float = DEFAULT_POINT_BUDGET
    radius_trials: int = 10_000

    def __post_init__(self):
        if self.experiment not in _EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if not self.lambda_values or not self.t_values:
            raise ValueError("sweep grids must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        for lam in self.lambda_values:
            for t in self.t_values:
                # raises OutOfRange early instead of mid-sweep
                self.base.with_overrides(lambda_B=lam, T=t)


@dataclass
class SweepResult:
    experiment: str
    header: tuple[str, ...]
    rows: list[tuple]
    manifest: dict

    def write_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(self.header) + "\n")
            for row in self.rows:
                fh.write(",".join(_fmt(x) for x in row) + "\n")

    def write_manifest(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if math.isnan(v):
        return ""
    return "%.12g" % v


def _seed_int(master_seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _manifest(spec: SweepSpec, elapsed: float, extra: Optional[dict] = None) -> dict:
    from . import __version__

    doc = {
        "experiment": spec.experiment,
        "params": spec.base.as_dict(),
        "lambda_values": list(spec.lambda_values),
        "t_values": list(spec.t_values),
        "radius_mode": None if spec.radius_mode is None else spec.radius_mode.value,
        "rate_mode": spec.rate_mode.value,
        "trials": spec.trials,
        "master_seed": spec.master_seed,
        "threads": spec.threads,
        "point_budget": spec.point_budget,
        "radius_trials": spec.radius_trials,
        "version": __version__,
        "elapsed_seconds": elapsed,
    }
    if extra:
        doc.update(extra)
    return doc


def _solve_radius(
    p: SystemParams, mode: RadiusMode, spec: SweepSpec, *key: int
) -> SelectionRadius:
    return selection_radius(
        p, mode,
        trials=spec.radius_trials,
        seed=_seed_int(spec.master_seed, 9, *key),
    )


def experiment_radius_vs_density(spec: SweepSpec) -> SweepResult:
    """Selection radius in all three modes across the BS-density sweep.

    Columns: lambda_B, T, radius_paper_km, radius_corrected_km,
    radius_exact_km, paper_radicand.
    """
    t0 = time.monotonic()
    rows = []
    for i_l, lam in enumerate(spec.lambda_values):
        for i_t, t in enumerate(spec.t_values):
            p = spec.base.with_overrides(lambda_B=lam, T=t)
            paper = selection_radius(p, RadiusMode.PaperClosedForm)
            corrected = selection_radius(p, RadiusMode.CorrectedClosedForm)
            exact = _solve_radius(p, RadiusMode.NumericExact, spec, i_l, i_t)
            rows.append(
                (lam, t, paper.value, corrected.value, exact.value, paper.radicand)
            )
    header = (
        "lambda_B", "T", "radius_paper_km", "radius_corrected_km",
        "radius_exact_km", "paper_radicand",
    )
    return SweepResult(
        "radius", header, rows, _manifest(spec, time.monotonic() - t0)
    )


def experiment_pmf(spec: SweepSpec) -> SweepResult:
    """Analytic vs empirical PMF of the typical cell's selected count.

    Long format: one row per (lambda_B, n).  Columns: lambda_B, T,
    radius_km, n, pmf_analytic, pmf_empirical, tv_distance,
    analytic_tail_mass, overlap_probability, overlap_stderr, trials.
    The total-variation distance covers the full truncated analytic
    vector including its tail mass, not just the printed rows.
    """
    t0 = time.monotonic()
    mode = spec.radius_mode or RadiusMode.NumericExact
    t = spec.t_values[0]
    rows = []
    notes = {}
    for i_l, lam in enumerate(spec.lambda_values):
        p = spec.base.with_overrides(lambda_B=lam, T=t)
        radius = _solve_radius(p, mode, spec, i_l, 0)
        if not radius.defined:
            notes[f"lambda_B={lam}"] = radius.undefined_reason
            rows.append((lam, t, None, None, None, None, None, None, None, None, spec.trials))
            continue
        r = radius.value
        summary = run_campaign(
            p, spec.trials, RadiusCircle(r),
            master_seed=spec.master_seed, stream_key=(1, i_l, 0),
            threads=spec.threads, point_budget=spec.point_budget,
        )
        analytic, tail = pmf_vector(p.lambda_U, r)
        emp = summary.pmf_empirical
        width = max(analytic.size, emp.size)
        pad_a = np.pad(analytic, (0, width - analytic.size))
        pad_e = np.pad(emp, (0, width - emp.size))
        tv = 0.5 * (float(np.abs(pad_a - pad_e).sum()) + tail)
        ov, ov_se = overlap_probability(
            p, r, spec.trials,
            master_seed=_seed_int(spec.master_seed, 1, i_l, 1),
            point_budget=spec.point_budget,
        )
        mu = p.lambda_U * math.pi * r * r
        n_hi = max(emp.size - 1, min(int(stats.poisson.ppf(1.0 - 1e-6, mu)), 300))
        for n in range(n_hi + 1):
            a_n = pad_a[n] if n < width else 0.0
            e_n = pad_e[n] if n < width else 0.0
            rows.append((lam, t, r, n, a_n, e_n, tv, tail, ov, ov_se, spec.trials))
    header = (
        "lambda_B", "T", "radius_km", "n", "pmf_analytic", "pmf_empirical",
        "tv_distance", "analytic_tail_mass", "overlap_probability",
        "overlap_stderr", "trials",
    )
    return SweepResult(
        "pmf", header, rows,
        _manifest(spec, time.monotonic() - t0, {"radius_mode_used": mode.value,
                                                "undefined": notes}),
    )


def experiment_throughput_vs_T(spec: SweepSpec) -> SweepResult:
    """Analytic (both rate modes) and empirical system throughput over T.

    Columns: row_kind, lambda_B, T, radius_km, rts_analytic_linear,
    rts_analytic_log, rtc_analytic_log, rts_empirical,
    rts_empirical_stderr, rtc_empirical, rtc_empirical_stderr,
    lambda_B_active_empirical, mean_i_inter.  After each density's grid
    rows, one row_kind=optimum row reports the empirically refined T*.
    """
    t0 = time.monotonic()
    mode = spec.radius_mode or RadiusMode.CorrectedClosedForm
    rows = []
    header = (
        "row_kind", "lambda_B", "T", "radius_km",
        "rts_analytic_linear", "rts_analytic_log", "rtc_analytic_log",
        "rts_empirical", "rts_empirical_stderr",
        "rtc_empirical", "rtc_empirical_stderr",
        "lambda_B_active_empirical", "mean_i_inter",
    )
    for i_l, lam in enumerate(spec.lambda_values):
        emp_curve: list[Optional[float]] = []
        for i_t, t in enumerate(spec.t_values):
            p = spec.base.with_overrides(lambda_B=lam, T=t)
            radius = _solve_radius(p, mode, spec, i_l, i_t)
            if not radius.defined:
                emp_curve.append(None)
                rows.append(("grid", lam, t) + (None,) * (len(header) - 3))
                continue
            summary = run_campaign(
                p, spec.trials, RadiusCircle(radius.value),
                master_seed=spec.master_seed, stream_key=(2, i_l, i_t),
                threads=spec.threads, point_budget=spec.point_budget,
            )
            i_mean = summary.mean_i_inter
            rtc_lin = cell_throughput(p, radius, i_mean, RateMode.PaperLinear)
            rtc_log = cell_throughput(p, radius, i_mean, RateMode.LogSumRate)
            rts_lin, _ = system_throughput(p, rtc_lin, radius)
            rts_log, _ = system_throughput(p, rtc_log, radius)
            emp_curve.append(summary.mean_system_throughput)
            rows.append((
                "grid", lam, t, radius.value, rts_lin, rts_log, rtc_log,
                summary.mean_system_throughput, summary.stderr_system_throughput,
                summary.mean_cell_throughput, summary.stderr_cell_throughput,
                summary.lambda_B_active, i_mean,
            ))
        try:
            t_star, v_star = optimal_T(
                spec.base.with_overrides(lambda_B=lam),
                spec.t_values, values=emp_curve,
            )
            rows.append(("optimum", lam, t_star, None, None, None, None,
                         v_star) + (None,) * 5)
        except AllUndefined:
            pass
    return SweepResult(
        "throughput", header, rows,
        _manifest(spec, time.monotonic() - t0, {"radius_mode_used": mode.value}),
    )


def experiment_interference_ablation(spec: SweepSpec) -> SweepResult:
    """Matched-seed with/without inter-cell interference over the T grid.

    Columns: lambda_B, T, radius_km, rts_with, rts_with_stderr,
    rts_without, rts_without_stderr, ratio_without_over_with.  Both arms
    share stream keys, so they see identical realizations and fading.
    """
    t0 = time.monotonic()
    mode = spec.radius_mode or RadiusMode.CorrectedClosedForm
    rows = []
    for i_l, lam in enumerate(spec.lambda_values):
        for i_t, t in enumerate(spec.t_values):
            p = spec.base.with_overrides(lambda_B=lam, T=t)
            radius = _solve_radius(p, mode, spec, i_l, i_t)
            if not radius.defined:
                rows.append((lam, t) + (None,) * 6)
                continue
            common = dict(
                master_seed=spec.master_seed, stream_key=(3, i_l, i_t),
                threads=spec.threads, point_budget=spec.point_budget,
            )
            with_i = run_campaign(
                p, spec.trials, RadiusCircle(radius.value),
                include_interference=True, **common,
            )
            without_i = run_campaign(
                p, spec.trials, RadiusCircle(radius.value),
                include_interference=False, **common,
            )
            ratio = (
                without_i.mean_system_throughput / with_i.mean_system_throughput
                if with_i.mean_system_throughput > 0 else None
            )
            rows.append((
                lam, t, radius.value,
                with_i.mean_system_throughput, with_i.stderr_system_throughput,
                without_i.mean_system_throughput, without_i.stderr_system_throughput,
                ratio,
            ))
    header = (
        "lambda_B", "T", "radius_km", "rts_with", "rts_with_stderr",
        "rts_without", "rts_without_stderr", "ratio_without_over_with",
    )
    return SweepResult(
        "ablation", header, rows,
        _manifest(spec, time.monotonic() - t0, {"radius_mode_used": mode.value}),
    )


_RUNNERS = {
    "radius": experiment_radius_vs_density,
    "pmf": experiment_pmf,
    "throughput": experiment_throughput_vs_T,
    "ablation": experiment_interference_ablation,
}

_DEFAULT_GRIDS = {
    "radius": (DEFAULT_RADIUS_LAMBDAS, DEFAULT_RADIUS_TS),
    "pmf": (DEFAULT_PMF_LAMBDAS, None),  # pmf keeps the base T
    "throughput": (DEFAULT_THROUGHPUT_LAMBDAS, DEFAULT_T_GRID),
    "ablation": (DEFAULT_ABLATION_LAMBDAS, DEFAULT_T_GRID),
}


def default_spec(
    experiment: str,
    base: SystemParams,
    *,
    lambda_values: Optional[Sequence[float]] = None,
    t_values: Optional[Sequence[float]] = None,
    **kw,
) -> SweepSpec:
    """SweepSpec with the experiment's documented default grids."""
    lam_default, t_default = _DEFAULT_GRIDS[experiment]
    if t_values is None:
        t_values = t_default if t_default is not None else (base.T,)
    if lambda_values is None:
        lambda_values = lam_default
    return SweepSpec(
        experiment=experiment,
        base=base,
        lambda_values=tuple(float(x) for x in lambda_values),
        t_values=tuple(float(x) for x in t_values),
        **kw,
    )


def run_experiment(spec: SweepSpec) -> tuple[str, str]:
    """Execute one experiment, writing CSV and manifest into output_dir.

    Returns (csv_path, manifest_path).
    """
    os.makedirs(spec.output_dir, exist_ok=True)
    result = _RUNNERS[spec.experiment](spec)
    csv_path = os.path.join(spec.output_dir, f"{spec.experiment}.csv")
    manifest_path = os.path.join(spec.output_dir, f"{spec.experiment}_manifest.json")
    result.write_csv(csv_path)
    result.write_manifest(manifest_path)
    return csv_path, manifest_path
