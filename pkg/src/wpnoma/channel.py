"""Propagation model: unbounded power-law path loss with Rayleigh fading.

The gain over a link of length r km is h * r**(-alpha) with h unit-mean
exponential (Rayleigh envelope).  The singularity at r = 0 is fenced off
by R_MIN_KM: geometry code clamps sampled distances up to that floor,
and passing anything shorter to path_loss raises DegenerateDistance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

R_MIN_KM = 1e-3  # 1 m guard radius below which the far-field model is meaningless


class DegenerateDistance(ValueError):
    """Distance below R_MIN_KM reached the path-loss law."""


def path_loss(r, alpha: float):
    """r**(-alpha) for scalar or array r (km), rejecting r < R_MIN_KM."""
    r = np.asarray(r, dtype=float)
    if np.any(r < R_MIN_KM):
        bad = float(np.min(r))
        raise DegenerateDistance(f"distance {bad} km below guard radius {R_MIN_KM} km")
    out = r ** (-alpha)
    return float(out) if out.ndim == 0 else out


def clamp_distance(r):
    """Lift distances onto [R_MIN_KM, inf); returns (clamped, n_clamped)."""
    r = np.asarray(r, dtype=float)
    n = int(np.count_nonzero(r < R_MIN_KM))
    if n:
        r = np.maximum(r, R_MIN_KM)
    return r, n


def draw_fading(rng: np.random.Generator, size=None):
    """Unit-mean exponential power gains."""
    return rng.standard_exponential(size)


def received_power(p_tx, gain, r, alpha: float):
    """p_tx * gain * r**(-alpha); broadcasts over array inputs."""
    return np.asarray(p_tx) * np.asarray(gain) * path_loss(r, alpha)


@dataclass(frozen=True)
class ChannelDraw:
    """One link's fading pair: h for the harvest phase, g for the uplink."""

    h: float
    g: float


def draw_channel(rng: np.random.Generator) -> ChannelDraw:
    h, g = rng.standard_exponential(2)
    return ChannelDraw(h=float(h), g=float(g))
