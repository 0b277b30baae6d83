"""System parameters, validation, and config file loading.

All downstream code receives a frozen :class:`SystemParams`, so every
range check lives here and nowhere else.  Unit conventions:

* distances and densities use kilometres (km, points/km^2)
* powers use watts, energies use joules
* ``T`` and ``a`` are dimensionless fractions
* the slot length is in seconds and defaults to 1 s, which makes
  harvested energy numerically equal to harvested power
"""

from __future__ import annotations

from dataclasses import dataclass, asdict, replace
from typing import Any, Mapping

import yaml


class ParamError(ValueError):
    """Base class for parameter validation failures."""


class MissingField(ParamError):
    def __init__(self, field: str):
        self.field = field
        super().__init__(f"missing required parameter: {field}")


class OutOfRange(ParamError):
    def __init__(self, field: str, value: float, allowed: str):
        self.field = field
        self.value = value
        self.allowed = allowed
        super().__init__(f"parameter {field}={value!r} outside allowed range {allowed}")


# open/closed interval per field, as (lo, hi, lo_open, hi_open), hi=None means unbounded
_RANGES: dict[str, tuple[float, float | None, bool, bool]] = {
    "T": (0.0, 1.0, True, True),
    "a": (0.0, 1.0, True, False),
    "P_S": (0.0, None, True, True),
    "alpha": (2.0, None, True, True),
    "E_th": (0.0, None, True, True),
    "beta": (0.0, 1.0, True, True),
    "lambda_B": (0.0, None, True, True),
    "lambda_U": (0.0, None, True, True),
    "sigma": (0.0, None, False, True),
    "slot": (0.0, None, True, True),
}

_DEFAULTS: dict[str, float] = {
    "lambda_U": 100.0,
    "sigma": 1e-12,
    "slot": 1.0,
}

_REQUIRED = tuple(k for k in _RANGES if k not in _DEFAULTS)


@dataclass(frozen=True)
class SystemParams:
    """Validated, immutable snapshot of every model parameter."""

    T: float          # harvest sub-slot fraction, in (0, 1)
    a: float          # fraction of BS power devoted to the energy beam, in (0, 1]
    P_S: float        # BS transmit power [W]
    alpha: float      # path-loss exponent, > 2
    E_th: float       # per-slot energy budget a UE must harvest [J]
    beta: float       # target harvest-success probability, in (0, 1)
    lambda_B: float   # BS density [1/km^2]
    lambda_U: float   # UE density [1/km^2]
    sigma: float      # receiver noise power [W]
    slot: float = 1.0  # slot duration [s]

    def uplink_power(self) -> float:
        """Per-UE transmit power when the whole budget E_th is spent
        in the uplink sub-slot of length (1 - T) * slot [W]."""
        return self.E_th / ((1.0 - self.T) * self.slot)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)

    def with_overrides(self, **kw: float) -> "SystemParams":
        """Return a re-validated copy with the given fields replaced."""
        return validate(asdict(replace(self, **kw)))


def validate(raw: Mapping[str, Any]) -> SystemParams:
    """Build a SystemParams from a flat mapping, applying defaults.

    Raises MissingField for absent required keys, OutOfRange for values
    outside their documented interval, and ParamError for unknown keys
    or non-numeric values.
    """
    unknown = set(raw) - set(_RANGES)
    if unknown:
        raise ParamError(f"unknown parameter(s): {', '.join(sorted(unknown))}")

    values: dict[str, float] = {}
    for name in _RANGES:
        if name in raw:
            v = raw[name]
        elif name in _DEFAULTS:
            v = _DEFAULTS[name]
        else:
            raise MissingField(name)
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise ParamError(f"parameter {name}={v!r} is not numeric") from None
        if v != v:  # NaN never compares inside any interval
            raise OutOfRange(name, v, _interval_str(name))
        lo, hi, lo_open, hi_open = _RANGES[name]
        if (v <= lo if lo_open else v < lo):
            raise OutOfRange(name, v, _interval_str(name))
        if hi is not None and (v >= hi if hi_open else v > hi):
            raise OutOfRange(name, v, _interval_str(name))
        values[name] = v
    return SystemParams(**values)


def _interval_str(name: str) -> str:
    lo, hi, lo_open, hi_open = _RANGES[name]
    left = "(" if lo_open else "["
    right = ")" if hi_open else "]"
    return f"{left}{lo}, {hi if hi is not None else 'inf'}{right}"


def baseline_params(**overrides: float) -> SystemParams:
    """Default operating point used throughout the docs and sweeps."""
    base = dict(
        T=0.15,
        a=0.5,
        P_S=1.0,
        alpha=4.0,
        E_th=1e-4,
        beta=0.99,
        lambda_B=30.0,
    )
    base.update(overrides)
    return validate(base)


def read_params_file(path: str) -> SystemParams:
    """Load a flat YAML mapping of parameter name to number."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParamError(f"config file {path} must contain a flat mapping")
    return validate(doc)
