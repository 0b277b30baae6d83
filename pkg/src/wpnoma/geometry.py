"""Point process sampling and Voronoi association on a square window.

The window is a side-W square centred on the origin, so the typical
cell (the cell whose base station is nearest the origin) sits in the
middle, as far from edge effects as a finite sample allows.  Window
sizing balances two pressures: the far field of the interference sum
needs width well beyond the selection radius, while the point budget
keeps a single trial affordable when the radius is large.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .params import SystemParams

log = logging.getLogger(__name__)

DEFAULT_POINT_BUDGET = 2048  # soft cap on E[#BS + #UE] per realization


class NoBaseStations(ValueError):
    """A realization came up with zero base stations."""


@dataclass(frozen=True)
class NetworkRealization:
    """One sampled network: BS/UE coordinates plus nearest-BS labels."""

    window: float            # full side length [km]
    bs: np.ndarray           # (n_bs, 2) positions [km]
    ue: np.ndarray           # (n_ue, 2) positions [km]
    association: np.ndarray  # (n_ue,) index into bs of each UE's serving BS

    @property
    def n_bs(self) -> int:
        return self.bs.shape[0]

    @property
    def n_ue(self) -> int:
        return self.ue.shape[0]


def sample_ppp(intensity: float, window: float, rng: np.random.Generator) -> np.ndarray:
    """Homogeneous PPP of the given intensity [1/km^2] on the square.

    Returns an (n, 2) array; n is Poisson with mean intensity * window**2.
    """
    n = rng.poisson(intensity * window * window)
    return rng.uniform(-window / 2.0, window / 2.0, size=(n, 2))


def associate(bs: np.ndarray, ue: np.ndarray) -> np.ndarray:
    """Nearest-BS labels for each UE (ties break to the lowest BS index)."""
    if bs.shape[0] == 0:
        raise NoBaseStations("cannot associate users without base stations")
    if ue.shape[0] == 0:
        return np.empty(0, dtype=np.intp)
    return np.argmin(cdist(ue, bs), axis=1)


def typical_bs_index(bs: np.ndarray) -> int:
    """Index of the BS closest to the origin (the typical cell's BS)."""
    if bs.shape[0] == 0:
        raise NoBaseStations("realization has no base stations")
    return int(np.argmin(np.einsum("ij,ij->i", bs, bs)))


def typical_cell(real: NetworkRealization) -> int:
    return typical_bs_index(real.bs)


def ordered_bs_distances(point: np.ndarray, bs: np.ndarray) -> np.ndarray:
    """Sorted distances from a single point to every BS."""
    d = np.hypot(bs[:, 0] - point[0], bs[:, 1] - point[1])
    d.sort()
    return d


def sample_realization(
    p: SystemParams, window: float, rng: np.random.Generator
) -> NetworkRealization:
    bs = sample_ppp(p.lambda_B, window, rng)
    if bs.shape[0] == 0:
        raise NoBaseStations(f"no BS in window {window} km at lambda_B={p.lambda_B}")
    ue = sample_ppp(p.lambda_U, window, rng)
    return NetworkRealization(window=window, bs=bs, ue=ue, association=associate(bs, ue))


def guard_margin(p: SystemParams, r_hint: float) -> float:
    """Distance the window must keep between the origin and its edge."""
    return max(10.0 * r_hint, 5.0 / np.sqrt(p.lambda_B))


def simulation_window(
    p: SystemParams,
    r_hint: float,
    point_budget: float = DEFAULT_POINT_BUDGET,
) -> tuple[float, bool]:
    """Pick the window side length for a trial.

    Ideal width is twice the guard margin around the origin.  When that
    would blow the point budget (large selection radius), fall back to
    the widest affordable window, but never below the density floor
    2 * 5 / sqrt(lambda_B) that keeps a healthy BS population.  Returns
    (window, capped); capped means the guard margin was sacrificed.
    """
    w_guard = 2.0 * guard_margin(p, r_hint)
    w_cap = np.sqrt(point_budget / (p.lambda_B + p.lambda_U))
    w_floor = 2.0 * 5.0 / np.sqrt(p.lambda_B)
    if w_guard <= w_cap:
        return w_guard, False
    w = max(w_floor, w_cap)
    key = round(w, 6)
    if key not in _warned_windows:
        _warned_windows.add(key)
        log.warning(
            "window capped at %.3f km (guard wanted %.3f km, budget %.0f points); "
            "far-field truncation grows accordingly",
            w, w_guard, point_budget,
        )
    return w, True


_warned_windows: set = set()


def dump_realization(real: NetworkRealization, path: str) -> None:
    """Write points as a TSV: kind, x, y, serving BS index (-1 for BS rows)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("kind\tx_km\ty_km\tserving_bs\n")
        for i in range(real.n_bs):
            fh.write(f"bs\t{real.bs[i, 0]:.9g}\t{real.bs[i, 1]:.9g}\t-1\n")
        for j in range(real.n_ue):
            fh.write(
                f"ue\t{real.ue[j, 0]:.9g}\t{real.ue[j, 1]:.9g}\t{int(real.association[j])}\n"
            )
