"""Closed-form quantities and their numeric counterparts.

Everything here is deterministic given its inputs; the only randomness
is the explicitly seeded conditioned sampler behind the NumericExact
mode.  Shorthand used throughout, with slot length s:

    c = E_th / (T * a * P_S * s)   harvest threshold on the fading sum
    d = 2 * pi * lambda_B / (alpha - 2)   Campbell far-field constant

A user at distance r1 from its nearest BS harvests
E = T * a * P_S * s * (h1 * r1**-alpha + sum_i h_i * r_i**-alpha), so
success E >= E_th is the event that the bracketed fading sum reaches c.
The two closed-form modes replace the interference sum by its Campbell
mean d * r1**(2-alpha); they differ in whether the r1**alpha factor
survives the algebra.  NumericExact keeps per-BS fading on the whole
field and estimates the probability by Monte Carlo.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy import stats

from .channel import R_MIN_KM
from .params import SystemParams


class RadiusMode(str, Enum):
    PaperClosedForm = "paper"
    CorrectedClosedForm = "corrected"
    NumericExact = "exact"


class RateMode(str, Enum):
    PaperLinear = "linear"
    LogSumRate = "log"


class UndefinedRadius(ValueError):
    """A throughput computation received an undefined selection radius."""


class NotSorted(ValueError):
    """Received powers handed to sic_rates were not in decode order."""


class AllUndefined(ValueError):
    """The selection radius is undefined over the entire search grid."""


def _c_threshold(p: SystemParams) -> float:
    return p.E_th / (p.T * p.a * p.P_S * p.slot)


def _d_campbell(p: SystemParams) -> float:
    return 2.0 * math.pi * p.lambda_B / (p.alpha - 2.0)


def campbell_mean_excess_interference(r1: float, lambda_B: float, alpha: float) -> float:
    """Mean of sum_{i>=2} h_i r_i**(-alpha) given the nearest BS sits at r1.

    Campbell's theorem over the PPP restricted to distances beyond r1,
    with unit-mean fading: 2 pi lambda_B r1**(2-alpha) / (alpha - 2).
    """
    if r1 <= 0:
        raise ValueError("r1 must be positive")
    if alpha <= 2:
        raise ValueError("alpha must exceed 2 for the integral to converge")
    return 2.0 * math.pi * lambda_B * r1 ** (2.0 - alpha) / (alpha - 2.0)


@dataclass(frozen=True)
class HarvestProbability:
    value: float
    stderr: Optional[float] = None  # populated only by NumericExact
    clamped: bool = False           # paper mode exceeded 1 before clamping


@dataclass(frozen=True)
class SelectionRadius:
    """Outcome of a radius solve; undefined is a value, not an exception."""

    value: Optional[float]
    mode: RadiusMode
    undefined_reason: Optional[str] = None
    radicand: Optional[float] = None  # paper mode only, reported either way

    @property
    def defined(self) -> bool:
        return self.value is not None


def _exact_success_fraction(
    p: SystemParams,
    r1: float,
    trials: int,
    rng: np.random.Generator,
    exact_k: int = 512,
    chunk: int = 8192,
) -> tuple[int, int]:
    """Count harvest successes conditioned on nearest-BS distance r1.

    The conditional field is a PPP beyond r1.  The nearest exact_k
    interferers (in expectation) are sampled individually with their own
    fading inside the annulus r1 < x <= R_x, area-uniform via inverse
    CDF; the remainder is folded in as a Gaussian matched to the exact
    mean and variance of the beyond-R_x shot noise (E[h^2] = 2), clipped
    at zero.  Draw counts never depend on r1, so a reseeded generator
    yields common random numbers across radii and the estimated success
    curve is pathwise monotone in r1, which bisection relies on.
    """
    r1 = max(r1, R_MIN_KM)
    lam, alpha = p.lambda_B, p.alpha
    c = _c_threshold(p)
    r1_sq = r1 * r1
    annulus_sq = exact_k / (math.pi * lam)  # R_x^2 - r1^2, fixed area
    rx_sq = r1_sq + annulus_sq
    tail_mean = 2.0 * math.pi * lam * rx_sq ** ((2.0 - alpha) / 2.0) / (alpha - 2.0)
    tail_var = 4.0 * math.pi * lam * rx_sq ** ((2.0 - 2.0 * alpha) / 2.0) / (2.0 * alpha - 2.0)
    tail_std = math.sqrt(tail_var)

    successes = 0
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        counts = rng.poisson(exact_k, size=m)
        h1 = rng.standard_exponential(m)
        z = rng.standard_normal(m)
        total = int(counts.sum())
        u = rng.random(total)
        h = rng.standard_exponential(total)
        contrib = h * (r1_sq + u * annulus_sq) ** (-alpha / 2.0)
        cs = np.concatenate(([0.0], np.cumsum(contrib)))
        ends = np.cumsum(counts)
        ring = cs[ends] - cs[ends - counts]
        tail = np.maximum(tail_mean + tail_std * z, 0.0)
        fading_sum = h1 * r1_sq ** (-alpha / 2.0) + ring + tail
        successes += int(np.count_nonzero(fading_sum >= c))
        done += m
    return successes, trials


def harvest_success_prob(
    r1: float,
    p: SystemParams,
    mode: RadiusMode,
    *,
    trials: int = 20_000,
    rng: Optional[np.random.Generator] = None,
    exact_k: int = 512,
) -> HarvestProbability:
    """P(harvested energy >= E_th) for a user whose nearest BS is at r1 km.

    Paper mode evaluates exp(-c + d r1^2) and clamps into [0, 1]; the
    corrected mode keeps the r1**alpha factor, exp(-(c r1^alpha - d r1^2))
    whenever that threshold is positive and exactly 1 otherwise; exact
    mode runs the conditioned Monte Carlo sampler and reports a standard
    error alongside the estimate.
    """
    if r1 <= 0:
        raise ValueError("r1 must be positive")
    c = _c_threshold(p)
    d = _d_campbell(p)
    if mode == RadiusMode.PaperClosedForm:
        exponent = -c + d * r1 * r1
        if exponent > 0:
            return HarvestProbability(value=1.0, clamped=True)
        return HarvestProbability(value=math.exp(exponent))
    if mode == RadiusMode.CorrectedClosedForm:
        threshold = c * r1 ** p.alpha - d * r1 * r1
        if threshold <= 0:
            return HarvestProbability(value=1.0)
        return HarvestProbability(value=math.exp(-threshold))
    if mode == RadiusMode.NumericExact:
        if rng is None:
            rng = np.random.default_rng(0)
        k, n = _exact_success_fraction(p, r1, trials, rng, exact_k=exact_k)
        phat = k / n
        stderr = math.sqrt(max(phat * (1.0 - phat), 1.0 / n) / n)
        return HarvestProbability(value=phat, stderr=stderr)
    raise ValueError(f"unknown mode {mode!r}")


def _bisect_nonincreasing(
    f: Callable[[float], float], lo: float, hi: float, target: float, tol: float
) -> float:
    """Smallest crossing of a nonincreasing f through target, given
    f(lo) >= target > f(hi)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def selection_radius(
    p: SystemParams,
    mode: RadiusMode,
    *,
    trials: int = 10_000,
    seed: int = 0,
    exact_k: int = 512,
    r_max: float = 1e4,
    tol: float = 1e-6,
) -> SelectionRadius:
    """Radius of the selection circle: harvest success equals beta there.

    Paper mode is the closed form sqrt((ln beta + c) / d) and reports an
    Undefined outcome when the radicand is negative.  The other two
    modes bracket and bisect their respective success curves down to
    tol km; the exact mode reuses one seeded stream per probability
    evaluation so the bisected curve is a fixed monotone function.
    """
    c = _c_threshold(p)
    d = _d_campbell(p)
    if mode == RadiusMode.PaperClosedForm:
        radicand = (math.log(p.beta) + c) / d
        if radicand < 0:
            return SelectionRadius(
                value=None,
                mode=mode,
                undefined_reason=f"negative radicand {radicand:.6g}",
                radicand=radicand,
            )
        return SelectionRadius(value=math.sqrt(radicand), mode=mode, radicand=radicand)

    if mode == RadiusMode.CorrectedClosedForm:
        def prob(r: float) -> float:
            return harvest_success_prob(r, p, RadiusMode.CorrectedClosedForm).value
    elif mode == RadiusMode.NumericExact:
        base = np.random.SeedSequence(seed, spawn_key=(0x5E1EC7,))

        def prob(r: float) -> float:
            k, n = _exact_success_fraction(
                p, r, trials, np.random.default_rng(base), exact_k=exact_k
            )
            return k / n
    else:
        raise ValueError(f"unknown mode {mode!r}")

    lo = R_MIN_KM
    if prob(lo) < p.beta:
        return SelectionRadius(
            value=None,
            mode=mode,
            undefined_reason=f"success probability below beta at the {R_MIN_KM} km floor",
        )
    hi = 2.0 * R_MIN_KM
    while prob(hi) >= p.beta:
        lo = hi
        hi *= 2.0
        if hi > r_max:
            return SelectionRadius(
                value=None,
                mode=mode,
                undefined_reason=f"success probability never falls below beta within {r_max} km",
            )
    return SelectionRadius(
        value=_bisect_nonincreasing(prob, lo, hi, p.beta, tol), mode=mode
    )


def pmf_N(n, lambda_U: float, r: float):
    """Poisson PMF of the user count in a circle of radius r km."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    mu = lambda_U * math.pi * r * r
    out = stats.poisson.pmf(n, mu)
    return float(out) if np.ndim(n) == 0 else out


def pmf_vector(
    lambda_U: float, r: float, *, tail: float = 1e-9, n_cap: int = 10_000
) -> tuple[np.ndarray, float]:
    """PMF values for n = 0..n_max plus the mass left beyond n_max.

    n_max is the smallest count with Poisson tail below the requested
    level, capped at n_cap; hitting the cap leaves visible tail mass,
    which callers must surface rather than renormalize away.
    """
    mu = lambda_U * math.pi * r * r
    if mu == 0.0:
        return np.array([1.0]), 0.0
    n_max = int(stats.poisson.isf(tail, mu))
    while stats.poisson.sf(n_max, mu) >= tail and n_max < n_cap:
        n_max += 1
    n_max = min(n_max, n_cap)
    probs = stats.poisson.pmf(np.arange(n_max + 1), mu)
    return probs, float(stats.poisson.sf(n_max, mu))


def sic_rates(received, i_inter: float, sigma: float, T: float) -> np.ndarray:
    """Per-user SIC rates, strongest decoded first.

    R_m = (1 - T) log2(1 + S_m / (i_inter + sum_{i>m} S_i + sigma)),
    sharing one suffix-sum pass so the telescoping identity
    sum_m R_m = (1-T) log2(1 + sum S / (i_inter + sigma)) holds to a
    few ulp regardless of the power spread.
    """
    s = np.asarray(received, dtype=float)
    if s.size == 0:
        return np.empty(0)
    if np.any(np.diff(s) > 0):
        raise NotSorted("received powers must be nonincreasing (decode order)")
    if np.any(s < 0) or i_inter < 0 or sigma < 0:
        raise ValueError("powers must be nonnegative")
    base = i_inter + sigma
    if base <= 0:
        raise ValueError("i_inter + sigma must be positive")
    # undecoded[m] = base + sum_{i>m} S_i; log1p keeps each rate relatively
    # accurate even when it is orders of magnitude below its log levels,
    # which a difference of plain logs would not
    undecoded = base + np.append(np.cumsum(s[::-1])[::-1], 0.0)[1:]
    return (1.0 - T) * np.log1p(s / undecoded) / math.log(2.0)


def expected_received_power(p: SystemParams, r: float) -> float:
    """Mean uplink power at the BS from one user uniform in the circle.

    Radial quadrature of P_u * x**(-alpha) * 2x / r^2 over [r_min, r];
    unit-mean fading drops out.  The sliver of the disk below r_min
    contributes nothing here, mirroring the closed-form convention.
    """
    if r <= R_MIN_KM:
        return 0.0
    p_u = p.uplink_power()

    # substitute x = e^t: the integrand becomes a smooth decaying
    # exponential, which adaptive quadrature handles across the wide
    # dynamic range between r_min and r
    def integrand(t: float) -> float:
        x = math.exp(t)
        return x ** (2.0 - p.alpha) * 2.0 / (r * r)

    val, _ = integrate.quad(
        integrand, math.log(R_MIN_KM), math.log(r), epsrel=1e-8, limit=200
    )
    return p_u * val


def cell_throughput(
    p: SystemParams,
    radius: SelectionRadius,
    i_inter_mean: float,
    mode: RateMode,
) -> float:
    """Expected per-cell throughput [bit/s/Hz], user count marginalized.

    Each of the N selected users contributes the expected received
    power; linear mode is the plain SINR sum (1-T) E[N] S / (I + sigma),
    log mode the telescoped sum rate (1-T) log2(1 + N S / (I + sigma))
    averaged over the Poisson N.
    """
    if not radius.defined:
        raise UndefinedRadius(radius.undefined_reason or "selection radius undefined")
    r = radius.value
    if r <= 0:
        return 0.0
    e_s = expected_received_power(p, r)
    denom = i_inter_mean + p.sigma
    if denom <= 0:
        raise ValueError("i_inter_mean + sigma must be positive")
    probs, _tail = pmf_vector(p.lambda_U, r)
    n = np.arange(probs.size)
    if mode == RateMode.PaperLinear:
        return float((1.0 - p.T) * np.dot(probs, n) * e_s / denom)
    if mode == RateMode.LogSumRate:
        return float((1.0 - p.T) * np.dot(probs, np.log2(1.0 + n * e_s / denom)))
    raise ValueError(f"unknown mode {mode!r}")


def system_throughput(
    p: SystemParams, R_tc: float, radius: SelectionRadius
) -> tuple[float, float]:
    """Area throughput R_ts = lambda_B' * R_tc and the active-BS density
    lambda_B' = lambda_B * (1 - P(N=0))."""
    if R_tc < 0:
        raise ValueError("R_tc must be nonnegative")
    if not radius.defined:
        raise UndefinedRadius(radius.undefined_reason or "selection radius undefined")
    lam_active = p.lambda_B * (1.0 - pmf_N(0, p.lambda_U, radius.value))
    return lam_active * R_tc, lam_active


@dataclass(frozen=True)
class AnalyticReport:
    """Closed-form outputs for one parameter point, JSON-serializable."""

    params: SystemParams
    radius: SelectionRadius
    rate_mode: RateMode
    i_inter_mean: float
    pmf: Optional[np.ndarray]
    pmf_tail_mass: Optional[float]
    lambda_B_active: Optional[float]
    R_tc: Optional[float]
    R_ts: Optional[float]

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "radius_mode": self.radius.mode.value,
            "radius_km": self.radius.value,
            "radius_undefined_reason": self.radius.undefined_reason,
            "rate_mode": self.rate_mode.value,
            "i_inter_mean": self.i_inter_mean,
            "pmf": None if self.pmf is None else [float(x) for x in self.pmf],
            "pmf_tail_mass": self.pmf_tail_mass,
            "lambda_B_active": self.lambda_B_active,
            "R_tc": self.R_tc,
            "R_ts": self.R_ts,
        }

    def to_json(self, **kw) -> str:
        kw.setdefault("sort_keys", True)
        kw.setdefault("indent", 2)
        return json.dumps(self.to_json_dict(), **kw)


def analytic_report(
    p: SystemParams,
    *,
    radius_mode: RadiusMode = RadiusMode.CorrectedClosedForm,
    rate_mode: RateMode = RateMode.LogSumRate,
    i_inter_mean: float = 0.0,
    radius_trials: int = 10_000,
    seed: int = 0,
) -> AnalyticReport:
    """One-stop closed-form evaluation; undefined radius leaves the
    dependent fields empty instead of raising."""
    radius = selection_radius(p, radius_mode, trials=radius_trials, seed=seed)
    if not radius.defined:
        return AnalyticReport(
            params=p, radius=radius, rate_mode=rate_mode, i_inter_mean=i_inter_mean,
            pmf=None, pmf_tail_mass=None, lambda_B_active=None, R_tc=None, R_ts=None,
        )
    probs, tail = pmf_vector(p.lambda_U, radius.value)
    r_tc = cell_throughput(p, radius, i_inter_mean, rate_mode)
    r_ts, lam_active = system_throughput(p, r_tc, radius)
    return AnalyticReport(
        params=p, radius=radius, rate_mode=rate_mode, i_inter_mean=i_inter_mean,
        pmf=probs, pmf_tail_mass=tail, lambda_B_active=lam_active,
        R_tc=r_tc, R_ts=r_ts,
    )


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def optimal_T(
    p: SystemParams,
    grid: Sequence[float],
    *,
    radius_mode: RadiusMode = RadiusMode.CorrectedClosedForm,
    rate_mode: RateMode = RateMode.LogSumRate,
    i_inter_mean: float = 0.0,
    evaluator: Optional[Callable[[float], Optional[float]]] = None,
    values: Optional[Sequence[Optional[float]]] = None,
    refine: str = "golden",
    tol: float = 1e-3,
) -> tuple[float, float]:
    """Maximize R_ts over T: grid scan plus local refinement.

    By default each grid point is scored through the analytic pipeline
    (p's own T is ignored).  An evaluator callable overrides that; a
    precomputed `values` row (e.g. an empirical sweep) switches to
    3-point parabolic refinement since re-evaluation is impossible.
    Grid points where the radius is undefined score None and are
    skipped; if all of them are, AllUndefined is raised.  Ties break
    toward smaller T.
    """
    ts = [float(t) for t in grid]
    if len(ts) == 0 or any(not (0.0 < t < 1.0) for t in ts):
        raise ValueError("grid must be nonempty with every T in (0, 1)")
    if sorted(ts) != ts:
        raise ValueError("grid must be sorted ascending")

    if values is not None:
        vals = [None if v is None else float(v) for v in values]
        if len(vals) != len(ts):
            raise ValueError("values length must match grid")
        refine = "parabola"
    else:
        if evaluator is None:
            def evaluator(t: float) -> Optional[float]:
                q = p.with_overrides(T=t)
                radius = selection_radius(q, radius_mode)
                if not radius.defined:
                    return None
                r_tc = cell_throughput(q, radius, i_inter_mean, rate_mode)
                return system_throughput(q, r_tc, radius)[0]
        vals = [evaluator(t) for t in ts]

    defined = [(v, t) for t, v in zip(ts, vals) if v is not None]
    if not defined:
        raise AllUndefined("selection radius undefined across the entire grid")
    best_i = max(
        range(len(ts)),
        key=lambda i: (-math.inf if vals[i] is None else vals[i], -ts[i]),
    )
    t_best, v_best = ts[best_i], vals[best_i]
    lo_i, hi_i = max(best_i - 1, 0), min(best_i + 1, len(ts) - 1)

    if refine == "parabola":
        if best_i in (0, len(ts) - 1) or vals[lo_i] is None or vals[hi_i] is None:
            return t_best, v_best
        t0, t1, t2 = ts[lo_i], t_best, ts[hi_i]
        v0, v1, v2 = vals[lo_i], v_best, vals[hi_i]
        num = (t1 - t0) ** 2 * (v1 - v2) - (t1 - t2) ** 2 * (v1 - v0)
        den = (t1 - t0) * (v1 - v2) - (t1 - t2) * (v1 - v0)
        if den == 0:
            return t_best, v_best
        t_star = min(max(t1 - 0.5 * num / den, t0), t2)
        # interpolated height of the same parabola at its vertex
        coeffs = np.polyfit([t0, t1, t2], [v0, v1, v2], 2)
        return t_star, float(np.polyval(coeffs, t_star))

    if refine != "golden":
        raise ValueError(f"unknown refine strategy {refine!r}")
    if vals[lo_i] is None or vals[hi_i] is None:
        return t_best, v_best

    def consider(t: float, v: Optional[float]) -> None:
        nonlocal t_best, v_best
        if v is None:
            return
        if v > v_best or (v == v_best and t < t_best):
            t_best, v_best = t, v

    a, b = ts[lo_i], ts[hi_i]
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = evaluator(x1), evaluator(x2)
    consider(x1, f1)
    consider(x2, f2)
    while b - a > tol and f1 is not None and f2 is not None:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = evaluator(x1)
            consider(x1, f1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = evaluator(x2)
            consider(x2, f2)
    return t_best, v_best
