"""Monte Carlo engine: full two-phase slots over sampled PPP networks.

One trial samples a network, runs the harvest sub-slot (every BS beams
at P_S, each user sums T * a * P_S * slot * h * d**-alpha over all BS
links), applies the selection rule, then runs the uplink sub-slot where
every selected user network-wide transmits at P_u with fresh fading.
The typical cell's users give the per-cell statistics; everyone else's
uplink lands at the typical BS as inter-cell interference.

Reproducibility contract: trial i of a campaign draws from a generator
seeded by SeedSequence(master_seed, spawn_key=stream_key + (i,)), and
the per-trial draw order is fixed (BS count/positions, UE count/
positions, harvest fading, uplink fading in ascending UE index).  The
campaign reduction consumes per-trial values in index order, so results
are byte-identical for any worker count or execution schedule.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist

from . import analysis
from .channel import R_MIN_KM
from .geometry import (
    DEFAULT_POINT_BUDGET,
    guard_margin,
    sample_ppp,
    simulation_window,
    typical_bs_index,
)
from .params import SystemParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RadiusCircle:
    """Select users whose distance to their serving BS is at most r km."""

    r: float


@dataclass(frozen=True)
class RealizedEnergy:
    """Select users whose realized harvested energy reaches E_th."""


SelectionRule = Union[RadiusCircle, RealizedEnergy]


@dataclass(frozen=True)
class CellTrialRecord:
    """Per-trial outcome for the typical cell."""

    n_candidates: int            # UEs associated to the typical BS
    n_selected: int              # of those, UEs passing the selection rule
    harvested: np.ndarray        # realized harvest energies [J], selected UEs
    received_powers: np.ndarray  # S_i at the typical BS [W], nonincreasing
    i_inter: float               # interference used in the rate computation [W]
    i_inter_measured: float      # interference present on the air [W]
    rates: np.ndarray            # per-UE SIC rates [bit/s/Hz]
    circle_overlap: Optional[bool]  # typical circle meets a neighbor's circle
    n_in_circle: int             # UEs inside the circle regardless of cell
    n_clamped: int               # link distances lifted to the r_min floor


def run_trial(
    p: SystemParams,
    rule: SelectionRule,
    rng: np.random.Generator,
    *,
    window: Optional[float] = None,
    point_budget: float = DEFAULT_POINT_BUDGET,
    include_interference: bool = True,
) -> CellTrialRecord:
    """Simulate one slot and return the typical cell's record.

    The without-interference ablation only zeroes i_inter inside the
    rate computation; all sampling is identical, so matched seeds give
    records differing in rates alone.
    """
    r_sel = rule.r if isinstance(rule, RadiusCircle) else 0.0
    if window is None:
        window, _ = simulation_window(p, r_sel, point_budget)

    bs = sample_ppp(p.lambda_B, window, rng)
    if bs.shape[0] == 0:
        from .geometry import NoBaseStations

        raise NoBaseStations(f"no BS in window {window} km at lambda_B={p.lambda_B}")
    ue = sample_ppp(p.lambda_U, window, rng)
    n_ue, n_bs = ue.shape[0], bs.shape[0]
    b0 = typical_bs_index(bs)

    if n_ue:
        dist = cdist(ue, bs)
        assoc = np.argmin(dist, axis=1)
        own_dist = dist[np.arange(n_ue), assoc]
    else:
        dist = np.empty((0, n_bs))
        assoc = np.empty(0, dtype=np.intp)
        own_dist = np.empty(0)

    prefactor = p.T * p.a * p.P_S * p.slot
    n_clamped = 0

    # selection + realized harvest energies for the users that need them
    if isinstance(rule, RealizedEnergy):
        d_h = np.maximum(dist, R_MIN_KM)
        n_clamped += int(np.count_nonzero(dist < R_MIN_KM))
        h = rng.standard_exponential(dist.shape)
        energy = prefactor * np.einsum("ij,ij->i", h, d_h ** (-p.alpha))
        selected = energy >= p.E_th
        own = assoc == b0
        sel_typ = np.flatnonzero(own & selected)
        harvested = energy[sel_typ]
    else:
        selected = own_dist <= rule.r
        own = assoc == b0
        sel_typ = np.flatnonzero(own & selected)
        d_rows = np.maximum(dist[sel_typ], R_MIN_KM)
        n_clamped += int(np.count_nonzero(dist[sel_typ] < R_MIN_KM))
        h = rng.standard_exponential(d_rows.shape)
        harvested = prefactor * np.einsum("ij,ij->i", h, d_rows ** (-p.alpha))

    # uplink sub-slot: every selected user transmits at P_u
    p_u = p.uplink_power()
    sel_idx = np.flatnonzero(selected)
    g = rng.standard_exponential(sel_idx.size)
    d0 = dist[sel_idx, b0]
    n_clamped += int(np.count_nonzero(d0 < R_MIN_KM))
    d0 = np.maximum(d0, R_MIN_KM)
    s_all = p_u * g * d0 ** (-p.alpha)
    own_sel = assoc[sel_idx] == b0
    s_own = np.sort(s_all[own_sel])[::-1]
    i_measured = float(np.sum(s_all[~own_sel]))
    i_used = i_measured if include_interference else 0.0
    rates = analysis.sic_rates(s_own, i_used, p.sigma, p.T)

    if isinstance(rule, RadiusCircle):
        n_in_circle = int(np.count_nonzero(dist[:, b0] <= rule.r)) if n_ue else 0
        if n_bs > 1:
            db = np.hypot(bs[:, 0] - bs[b0, 0], bs[:, 1] - bs[b0, 1])
            db[b0] = np.inf
            circle_overlap = bool(db.min() < 2.0 * rule.r)
        else:
            circle_overlap = False
        g_margin = guard_margin(p, rule.r)
        if window / 2.0 >= g_margin and rule.r < g_margin:
            # uncapped window: the selection circle must fit inside it
            assert np.max(np.abs(bs[b0])) + rule.r <= window / 2.0 + 1e-9
    else:
        n_in_circle = int(sel_typ.size)
        circle_overlap = None

    return CellTrialRecord(
        n_candidates=int(np.count_nonzero(own)),
        n_selected=int(sel_typ.size),
        harvested=harvested,
        received_powers=s_own,
        i_inter=i_used,
        i_inter_measured=i_measured,
        rates=rates,
        circle_overlap=circle_overlap,
        n_in_circle=n_in_circle,
        n_clamped=n_clamped,
    )


@dataclass(frozen=True)
class EstimatorSummary:
    """Campaign aggregates with standard errors (sample std / sqrt(n))."""

    trials: int
    pmf_empirical: np.ndarray
    mean_cell_throughput: float
    stderr_cell_throughput: float
    mean_system_throughput: float
    stderr_system_throughput: float
    overlap_probability: Optional[float]
    overlap_stderr: Optional[float]
    lambda_B_active: float
    mean_i_inter: float
    mean_candidates: float
    window: float

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "pmf_empirical": [float(x) for x in self.pmf_empirical],
            "mean_cell_throughput": self.mean_cell_throughput,
            "stderr_cell_throughput": self.stderr_cell_throughput,
            "mean_system_throughput": self.mean_system_throughput,
            "stderr_system_throughput": self.stderr_system_throughput,
            "overlap_probability": self.overlap_probability,
            "overlap_stderr": self.overlap_stderr,
            "lambda_B_active": self.lambda_B_active,
            "mean_i_inter": self.mean_i_inter,
            "mean_candidates": self.mean_candidates,
            "window": self.window,
        }


def _trial_rng(master_seed: int, stream_key: tuple, i: int) -> np.random.Generator:
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(stream_key) + (i,))
    return np.random.default_rng(ss)


def _block_worker(args) -> tuple:
    (p, rule, lo, hi, master_seed, stream_key, window, include_interference) = args
    m = hi - lo
    n_sel = np.empty(m, dtype=np.int64)
    n_cand = np.empty(m, dtype=np.int64)
    cell_rate = np.empty(m)
    i_used = np.empty(m)
    i_meas = np.empty(m)
    overlap = np.empty(m, dtype=np.int8)
    n_circ = np.empty(m, dtype=np.int64)
    n_clamp = np.empty(m, dtype=np.int64)
    for k, i in enumerate(range(lo, hi)):
        try:
            rec = run_trial(
                p, rule, _trial_rng(master_seed, stream_key, i),
                window=window, include_interference=include_interference,
            )
        except Exception as exc:
            raise RuntimeError(f"trial {i} failed: {exc}") from exc
        n_sel[k] = rec.n_selected
        n_cand[k] = rec.n_candidates
        cell_rate[k] = float(np.sum(rec.rates))
        i_used[k] = rec.i_inter
        i_meas[k] = rec.i_inter_measured
        overlap[k] = -1 if rec.circle_overlap is None else int(rec.circle_overlap)
        n_circ[k] = rec.n_in_circle
        n_clamp[k] = rec.n_clamped
    return n_sel, n_cand, cell_rate, i_used, i_meas, overlap, n_circ, n_clamp


def run_campaign(
    p: SystemParams,
    trials: int,
    rule: SelectionRule,
    *,
    include_interference: bool = True,
    master_seed: int = 0,
    stream_key: tuple = (),
    threads: int = 1,
    window: Optional[float] = None,
    point_budget: float = DEFAULT_POINT_BUDGET,
    dump_path: Optional[str] = None,
) -> EstimatorSummary:
    """Aggregate `trials` independent slots into an EstimatorSummary.

    The empirical system throughput follows the analytic composition:
    lambda_B * (1 - fraction of empty cells) * mean cell throughput,
    with a delta-method standard error.  Campaign output is independent
    of `threads` by construction.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    r_sel = rule.r if isinstance(rule, RadiusCircle) else 0.0
    if window is None:
        window, _ = simulation_window(p, r_sel, point_budget)

    blocks = []
    if threads > 1:
        per = max(1, math.ceil(trials / (4 * threads)))
    else:
        per = trials
    lo = 0
    while lo < trials:
        hi = min(lo + per, trials)
        blocks.append((p, rule, lo, hi, master_seed, stream_key, window, include_interference))
        lo = hi

    if threads > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_block_worker, blocks))
    else:
        parts = [_block_worker(b) for b in blocks]

    n_sel, n_cand, cell_rate, i_used, i_meas, overlap, n_circ, n_clamp = (
        np.concatenate([part[j] for part in parts]) for j in range(8)
    )

    total_clamped = int(n_clamp.sum())
    if total_clamped:
        log.debug("campaign clamped %d link distances to the %g km floor",
                  total_clamped, R_MIN_KM)

    n = trials
    pmf_emp = np.bincount(n_sel) / n
    mean_rate = float(cell_rate.mean())
    var_rate = float(cell_rate.var(ddof=1)) if n > 1 else 0.0
    se_rate = math.sqrt(var_rate / n)
    p0 = float(pmf_emp[0]) if pmf_emp.size else 1.0
    lam_active = p.lambda_B * (1.0 - p0)
    mean_sys = lam_active * mean_rate
    # delta method over (p0_hat, mean_rate); rate is zero on empty cells,
    # so cov(1{empty}, rate) = -p0 * mean_rate
    v_p = p0 * (1.0 - p0) / n
    cov_mean = -p0 * mean_rate / n
    var_sys = (p.lambda_B ** 2) * (
        mean_rate ** 2 * v_p
        + (1.0 - p0) ** 2 * (var_rate / n)
        + 2.0 * (-mean_rate) * (1.0 - p0) * cov_mean
    )
    se_sys = math.sqrt(max(var_sys, 0.0))

    if isinstance(rule, RadiusCircle):
        ov = overlap.astype(float)
        ov_mean = float(ov.mean())
        ov_se = math.sqrt(max(ov_mean * (1.0 - ov_mean), 0.0) / n)
        overlap_probability: Optional[float] = ov_mean
        overlap_stderr: Optional[float] = ov_se
    else:
        overlap_probability = None
        overlap_stderr = None

    if dump_path is not None:
        with open(dump_path, "w", encoding="utf-8") as fh:
            fh.write(
                "trial\tn_candidates\tn_selected\tcell_rate\ti_inter\t"
                "i_inter_measured\tcircle_overlap\tn_in_circle\tn_clamped\n"
            )
            for i in range(n):
                fh.write(
                    f"{i}\t{n_cand[i]}\t{n_sel[i]}\t{cell_rate[i]:.12g}\t"
                    f"{i_used[i]:.12g}\t{i_meas[i]:.12g}\t{overlap[i]}\t"
                    f"{n_circ[i]}\t{n_clamp[i]}\n"
                )

    return EstimatorSummary(
        trials=n,
        pmf_empirical=pmf_emp,
        mean_cell_throughput=mean_rate,
        stderr_cell_throughput=se_rate,
        mean_system_throughput=mean_sys,
        stderr_system_throughput=se_sys,
        overlap_probability=overlap_probability,
        overlap_stderr=overlap_stderr,
        lambda_B_active=lam_active,
        mean_i_inter=float(i_meas.mean()),
        mean_candidates=float(n_cand.mean()),
        window=window,
    )


def overlap_probability(
    p: SystemParams,
    r: float,
    trials: int,
    *,
    master_seed: int = 0,
    point_budget: float = DEFAULT_POINT_BUDGET,
    chunk: int = 4096,
) -> tuple[float, float]:
    """P(a BS's circle of radius r intersects some neighbor's circle).

    Conditions a BS at the origin and samples the rest of the field; the
    circles meet iff the nearest neighbor sits closer than 2r.  The
    window is just wide enough to contain that disk, or as wide as the
    point budget affords (the estimate is then a lower bound, which only
    matters when it is already indistinguishable from 1).
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0.0:
        return 0.0, 0.0
    window = min(4.0 * r, math.sqrt(point_budget / p.lambda_B))
    window = max(window, 1.0 / math.sqrt(p.lambda_B))
    rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(0x0F,)))
    thresh_sq = (2.0 * r) ** 2
    hits = 0
    done = 0
    mean_pts = p.lambda_B * window * window
    while done < trials:
        m = min(chunk, trials - done)
        counts = rng.poisson(mean_pts, size=m)
        total = int(counts.sum())
        pts = rng.uniform(-window / 2.0, window / 2.0, size=(total, 2))
        near = (pts[:, 0] ** 2 + pts[:, 1] ** 2) < thresh_sq
        cs = np.concatenate(([0], np.cumsum(near.astype(np.int64))))
        ends = np.cumsum(counts)
        per_trial = cs[ends] - cs[ends - counts]
        hits += int(np.count_nonzero(per_trial > 0))
        done += m
    frac = hits / trials
    stderr = math.sqrt(max(frac * (1.0 - frac), 0.0) / trials)
    return frac, stderr
