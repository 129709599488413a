"""Power models, energy integration and operational CO2."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .catalog import POWER_MODELS, GPUConfig, SimParams
from .traces import CarbonSample, FragmentColumns, FragmentSample

Fragments = Union[Sequence[FragmentSample], FragmentColumns]


@dataclass(frozen=True)
class PowerModelSpec:
    kind: str = "linear"
    alpha: float = 0.3
    r: float = 1.4

    def __post_init__(self):
        if self.kind not in POWER_MODELS:
            raise ValueError(f"unknown power model {self.kind!r}; expected one of {POWER_MODELS}")
        if self.kind in ("asymptotic", "asymptotic_dvfs") and self.alpha <= 0:
            raise ValueError("alpha must be > 0 for asymptotic power models")

    @classmethod
    def from_params(cls, params: SimParams) -> "PowerModelSpec":
        return cls(params.power_model, params.alpha, params.r)


@dataclass(frozen=True)
class SustainabilityReport:
    total_energy_wh: float
    total_co2_g: Optional[float] = None  # None when no carbon trace was given


def _load_fraction(kind: str, u, alpha: float, r: float):
    if kind == "sqrt":
        return np.sqrt(u)
    if kind == "linear":
        return u
    if kind == "square":
        return u ** 2
    if kind == "cubic":
        return u ** 3
    if kind == "mse":
        return 2 * u - u ** r
    if kind == "asymptotic":
        return (1 + u - np.exp(-u / alpha)) / 2
    if kind == "asymptotic_dvfs":
        u3 = u ** 3
        return (1 + u3 - np.exp(-u3 / alpha)) / 2
    raise ValueError(f"unknown power model {kind!r}")


def power_draw(gpu: GPUConfig, spec: PowerModelSpec, u):
    """Watts drawn at utilization ``u`` in [0, 1]; ``u`` may be an array."""
    arr = np.asarray(u, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("utilization must lie in [0, 1]")
    watts = gpu.p_idle_w + (gpu.p_max_w - gpu.p_idle_w) * _load_fraction(spec.kind, arr, spec.alpha, spec.r)
    return float(watts) if arr.ndim == 0 else watts


def _power_column(fragments: Fragments) -> np.ndarray:
    if isinstance(fragments, FragmentColumns):
        return fragments.power_w
    return np.array([f.power_w for f in fragments], dtype=float)


def _ts_column(fragments: Fragments) -> np.ndarray:
    if isinstance(fragments, FragmentColumns):
        return fragments.ts_s
    return np.array([f.ts_s for f in fragments], dtype=float)


def integrate_energy(fragments: Fragments, interval_s: float) -> float:
    """Watt-hours, holding each fragment's power for one export interval."""
    return float(_power_column(fragments).sum()) * interval_s / 3600.0


class CarbonTrace:
    """Step-function view of a carbon-intensity trace."""

    def __init__(self, samples: Sequence[CarbonSample]):
        if not samples:
            raise ValueError("carbon trace is empty")
        self.starts = np.array([s.start_ts_s for s in samples], dtype=float)
        self.values = np.array([s.intensity_g_per_kwh for s in samples], dtype=float)
        if np.any(np.diff(self.starts) <= 0):
            raise ValueError("carbon samples must be strictly increasing in time")

    def intensity_at(self, ts):
        idx = np.searchsorted(self.starts, ts, side="right") - 1
        return self.values[np.clip(idx, 0, None)]


def co2_emissions(fragments: Fragments, interval_s: float,
                  carbon: Union[Sequence[CarbonSample], CarbonTrace]) -> float:
    """Grams of CO2: each fragment's kWh times the intensity in force at its timestamp."""
    trace = carbon if isinstance(carbon, CarbonTrace) else CarbonTrace(carbon)
    power = _power_column(fragments)
    if not len(power):
        return 0.0
    # sum power per intensity segment so a constant trace reduces to
    # integrate_energy * intensity / 1000 with identical rounding
    seg = np.clip(np.searchsorted(trace.starts, _ts_column(fragments), side="right") - 1, 0, None)
    order = np.argsort(seg, kind="stable")
    seg, power = seg[order], power[order]
    bounds = np.flatnonzero(np.diff(seg)) + 1
    total = 0.0
    for lo, hi in zip(np.r_[0, bounds], np.r_[bounds, len(seg)]):
        wh = float(power[lo:hi].sum()) * interval_s / 3600.0
        total += wh * float(trace.values[seg[lo]]) / 1000.0
    return total


def grid_carbon_intensity(sources: Sequence[tuple]) -> float:
    """Energy-weighted mean intensity of a grid mix of ``(g_per_kwh, kwh)`` pairs."""
    if not sources:
        raise ValueError("no energy sources given")
    ci = np.array([s[0] for s in sources], dtype=float)
    energy = np.array([s[1] for s in sources], dtype=float)
    if np.any(energy < 0):
        raise ValueError("energy shares must be >= 0")
    total = energy.sum()
    if total <= 0:
        raise ZeroDivisionError("total grid energy is zero")
    return float(np.sum(ci * energy) / total)
