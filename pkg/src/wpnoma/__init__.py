"""Wireless-powered uplink NOMA: analysis and Monte Carlo simulation.

Downlink energy harvesting from a Poisson field of base stations feeds
uplink NOMA transmissions inside the typical Voronoi cell.  The package
exposes closed-form expressions (selection radius, active-user PMF,
throughput) next to an independent Monte Carlo engine so the two can be
checked against each other, plus a sweep CLI that writes CSV/JSON
artifacts.

Distances are in kilometres, powers in watts, densities in points per
square kilometre, rates in bit/s/Hz.
"""

from .params import SystemParams, validate, baseline_params, read_params_file
from .analysis import (
    RadiusMode,
    RateMode,
    SelectionRadius,
    selection_radius,
    harvest_success_prob,
    campbell_mean_excess_interference,
    pmf_N,
    pmf_vector,
    sic_rates,
    cell_throughput,
    system_throughput,
    optimal_T,
)
from .montecarlo import (
    RadiusCircle,
    RealizedEnergy,
    run_trial,
    run_campaign,
    overlap_probability,
)

__version__ = "0.1.0"

__all__ = [
    "SystemParams",
    "validate",
    "baseline_params",
    "read_params_file",
    "RadiusMode",
    "RateMode",
    "SelectionRadius",
    "selection_radius",
    "harvest_success_prob",
    "campbell_mean_excess_interference",
    "pmf_N",
    "pmf_vector",
    "sic_rates",
    "cell_throughput",
    "system_throughput",
    "optimal_T",
    "RadiusCircle",
    "RealizedEnergy",
    "run_trial",
    "run_campaign",
    "overlap_probability",
    "__version__",
]
