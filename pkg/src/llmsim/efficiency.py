"""Cost- and sustainability-per-token metrics, system ratios and MAPE."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class MixedMetricError(ValueError):
    pass


def _total_tokens(tokens_prefill, tokens_decode) -> float:
    total = tokens_prefill + tokens_decode
    if total <= 0:
        raise ZeroDivisionError("efficiency undefined for zero tokens")
    return total


def financial_efficiency(cost, tokens_prefill, tokens_decode, time_prefill_s, time_decode_s) -> float:
    """Currency-seconds per token: cost times total time over total tokens."""
    return cost * (time_prefill_s + time_decode_s) / _total_tokens(tokens_prefill, tokens_decode)


def sustainability_efficiency(s_cost, tokens_prefill, tokens_decode, time_prefill_s, time_decode_s) -> float:
    """Same shape as :func:`financial_efficiency` with energy (Wh) or CO2 (g) as the cost."""
    return s_cost * (time_prefill_s + time_decode_s) / _total_tokens(tokens_prefill, tokens_decode)


def per_million_tokens(amount, tokens_prefill, tokens_decode) -> float:
    return amount / _total_tokens(tokens_prefill, tokens_decode) * 1e6


def gpu_hour_cost(price_per_hour: float, total_time_s: float) -> float:
    return price_per_hour * total_time_s / 3600.0


def financial_efficiency_ratio(e1: float, e2: float) -> float:
    if e2 == 0:
        raise ZeroDivisionError("second system's efficiency is zero")
    return e1 / e2


def time_squared_ratio(time1_s: float, time2_s: float) -> float:
    """Financial ratio reduced for equal token counts and a price proportional to time."""
    if time2_s == 0:
        raise ZeroDivisionError("second system's time is zero")
    return time1_s ** 2 / time2_s ** 2


@dataclass(frozen=True)
class SustainabilityMeasure:
    """One system's sustainability cost with the time and tokens it bought."""

    cost: float
    time_s: float
    tokens: float
    metric: str = "energy_wh"


def sustainability_efficiency_ratio(m1: SustainabilityMeasure, m2: SustainabilityMeasure) -> float:
    if m1.metric != m2.metric:
        raise MixedMetricError(f"cannot compare {m1.metric} with {m2.metric}")
    denom = m2.cost * m2.time_s * m1.tokens
    if denom == 0:
        raise ZeroDivisionError("denominator of sustainability ratio is zero")
    return (m1.cost * m1.time_s * m2.tokens) / denom


def mape(real: Sequence[float], sim: Sequence[float]) -> float:
    """Mean absolute percentage error of ``sim`` against ``real``, in percent."""
    r = np.asarray(real, dtype=float)
    s = np.asarray(sim, dtype=float)
    if r.shape != s.shape or r.ndim != 1:
        raise ValueError(f"length mismatch: {r.shape} vs {s.shape}")
    if r.size == 0:
        raise ValueError("need at least one sample")
    if np.any(r == 0):
        raise ZeroDivisionError("real values must be non-zero")
    return float(np.mean(np.abs(r - s) / np.abs(r)) * 100.0)


@dataclass(frozen=True)
class EfficiencyReport:
    financial_eff: float  # currency * s / token
    sustainability_eff_energy: float  # Wh * s / token
    sustainability_eff_co2: Optional[float]  # g * s / token
    cost_per_mtoken: float
    energy_wh_per_mtoken: float
    co2_per_mtoken: Optional[float]
    total_cost: float
    total_tokens: int
    total_time_s: float
    energy_wh: float
    co2_g: Optional[float]

    def measure(self, metric: str = "energy_wh") -> SustainabilityMeasure:
        if metric == "energy_wh":
            cost = self.energy_wh
        elif metric == "co2_g":
            if self.co2_g is None:
                raise ValueError("report has no CO2 figure")
            cost = self.co2_g
        else:
            raise ValueError(f"unknown metric {metric!r}")
        return SustainabilityMeasure(cost, self.total_time_s, self.total_tokens, metric)


def efficiency_report(
    tokens_prefill: int,
    tokens_decode: int,
    time_prefill_s: float,
    time_decode_s: float,
    price_per_hour: float,
    energy_wh: float,
    co2_g: Optional[float] = None,
) -> EfficiencyReport:
    total_time = time_prefill_s + time_decode_s
    cost = gpu_hour_cost(price_per_hour, total_time)
    args = (tokens_prefill, tokens_decode, time_prefill_s, time_decode_s)
    return EfficiencyReport(
        financial_eff=financial_efficiency(cost, *args),
        sustainability_eff_energy=sustainability_efficiency(energy_wh, *args),
        sustainability_eff_co2=None if co2_g is None else sustainability_efficiency(co2_g, *args),
        cost_per_mtoken=per_million_tokens(cost, tokens_prefill, tokens_decode),
        energy_wh_per_mtoken=per_million_tokens(energy_wh, tokens_prefill, tokens_decode),
        co2_per_mtoken=None if co2_g is None else per_million_tokens(co2_g, tokens_prefill, tokens_decode),
        total_cost=cost,
        total_tokens=tokens_prefill + tokens_decode,
        total_time_s=total_time,
        energy_wh=energy_wh,
        co2_g=co2_g,
    )
