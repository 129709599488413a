import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from llmsim.catalog import POWER_MODELS, lookup_gpu
from llmsim.sustainability import (
    CarbonTrace,
    PowerModelSpec,
    co2_emissions,
    grid_carbon_intensity,
    integrate_energy,
    power_draw,
)
from llmsim.traces import CarbonSample, FragmentColumns, FragmentSample

A10 = lookup_gpu("A10")
FULL_REACH = ("sqrt", "linear", "square", "cubic", "mse")
ASYMPTOTIC = ("asymptotic", "asymptotic_dvfs")


def formula(kind, u, p_idle, p_max, alpha=0.3, r=1.4):
    # written straight from the published table, scalar math only
    span = p_max - p_idle
    return {
        "sqrt": p_idle + span * math.sqrt(u),
        "linear": p_idle + span * u,
        "square": p_idle + span * u ** 2,
        "cubic": p_idle + span * u ** 3,
        "mse": p_idle + span * (2 * u - u ** r),
        "asymptotic": p_idle + span / 2 * (1 + u - math.exp(-u / alpha)),
        "asymptotic_dvfs": p_idle + span / 2 * (1 + u ** 3 - math.exp(-u ** 3 / alpha)),
    }[kind]


@pytest.mark.parametrize("kind", POWER_MODELS)
def test_idle_at_zero(kind):
    assert power_draw(A10, PowerModelSpec(kind), 0.0) == 20.0


def test_linear_half_load():
    assert power_draw(A10, PowerModelSpec("linear"), 0.5) == 85.0


@pytest.mark.parametrize("kind", FULL_REACH)
def test_full_load_reaches_max(kind):
    assert power_draw(A10, PowerModelSpec(kind), 1.0) == 150.0


@pytest.mark.parametrize("kind", ASYMPTOTIC)
def test_asymptotic_stays_below_max(kind):
    assert power_draw(A10, PowerModelSpec(kind), 1.0) < 150.0


@pytest.mark.parametrize("kind", POWER_MODELS)
@given(u=st.floats(0, 1))
def test_matches_table_formula(kind, u):
    assert power_draw(A10, PowerModelSpec(kind), u) == pytest.approx(formula(kind, u, 20, 150), rel=1e-12)


@pytest.mark.parametrize("kind", POWER_MODELS)
def test_monotone_on_grid(kind):
    u = np.linspace(0, 1, 1000)
    w = power_draw(A10, PowerModelSpec(kind), u)
    assert np.all(np.diff(w) >= 0)


@pytest.mark.parametrize("r", [1.0, 1.2, 1.5, 2.0])
def test_mse_monotone_for_r_in_1_2(r):
    w = power_draw(A10, PowerModelSpec("mse", r=r), np.linspace(0, 1, 1000))
    assert np.all(np.diff(w) >= 0)


@pytest.mark.parametrize("r", [0.5, 2.5, 3.0])
def test_mse_outside_1_2_recorded(r):
    # outside [1, 2] the model is not monotone on [0, 1]; record what happens
    w = power_draw(A10, PowerModelSpec("mse", r=r), np.linspace(0, 1, 1000))
    drops = int(np.sum(np.diff(w) < 0))
    assert drops > 0


@pytest.mark.parametrize("u", [-0.01, 1.01, float("nan")])
def test_utilization_out_of_range(u):
    with pytest.raises(ValueError):
        power_draw(A10, PowerModelSpec("linear"), u)


def test_spec_validation():
    with pytest.raises(ValueError):
        PowerModelSpec("quartic")
    with pytest.raises(ValueError):
        PowerModelSpec("asymptotic", alpha=0)


def _frags(watts, ts=None):
    ts = ts if ts is not None else range(len(watts))
    return [FragmentSample(0, float(t), "decode", 0.95, float(w), 0) for t, w in zip(ts, watts)]


def test_energy_examples():
    assert integrate_energy(_frags([100]), 3600) == 100.0
    assert integrate_energy(_frags([143.5] * 10), 1.0) == pytest.approx(143.5 * 10 / 3600)
    assert integrate_energy(_frags([143.5] * 10), 1.0) == pytest.approx(0.3986, abs=1e-4)
    assert integrate_energy([], 1.0) == 0.0


@given(st.lists(st.floats(0, 500), max_size=30), st.lists(st.floats(0, 500), max_size=30))
def test_energy_additive(a, b):
    lhs = integrate_energy(_frags(a + b), 0.1)
    rhs = integrate_energy(_frags(a), 0.1) + integrate_energy(_frags(b), 0.1)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_co2_constant_hour():
    assert co2_emissions(_frags([100]), 3600, [CarbonSample(0, 400)]) == 40.0


def test_co2_zero_grid():
    assert co2_emissions(_frags([150] * 5), 1.0, [CarbonSample(0, 0)]) == 0.0


def test_co2_step_halfway():
    carbon = [CarbonSample(0, 400), CarbonSample(3600, 200)]
    assert co2_emissions(_frags([100, 100], [0, 3600]), 3600, carbon) == 60.0


def test_co2_before_first_sample_uses_first():
    carbon = [CarbonSample(100, 300), CarbonSample(200, 50)]
    assert co2_emissions(_frags([100], [0]), 3600, carbon) == pytest.approx(30.0)


@given(st.lists(st.floats(0, 500), min_size=1, max_size=40), st.floats(0, 1000), st.sampled_from([0.001, 0.1, 1, 60]))
def test_co2_constant_equals_energy_times_intensity(watts, ci, dt):
    frags = _frags(watts, [i * dt for i in range(len(watts))])
    assert co2_emissions(frags, dt, [CarbonSample(0, ci)]) == integrate_energy(frags, dt) * ci / 1000


def test_co2_accepts_columns_and_trace():
    frags = _frags([10, 20, 30], [0, 900, 1800])
    carbon = [CarbonSample(0, 100), CarbonSample(900, 200), CarbonSample(1800, 300)]
    expected = sum(w * 900 / 3.6e6 * c for w, c in [(10, 100), (20, 200), (30, 300)])
    cols = FragmentColumns.from_samples(frags)
    assert co2_emissions(cols, 900, CarbonTrace(carbon)) == pytest.approx(expected, rel=1e-12)
    assert co2_emissions(frags, 900, carbon) == pytest.approx(expected, rel=1e-12)


def test_carbon_trace_rejects_disorder():
    with pytest.raises(ValueError):
        CarbonTrace([CarbonSample(10, 1), CarbonSample(5, 1)])


def test_grid_intensity():
    assert grid_carbon_intensity([(100, 1), (300, 1)]) == 200
    assert grid_carbon_intensity([(500, 2), (0, 0)]) == 500
    assert grid_carbon_intensity([(20, 3), (800, 1)]) == 215
    with pytest.raises(ZeroDivisionError):
        grid_carbon_intensity([(100, 0)])
    with pytest.raises(ValueError):
        grid_carbon_intensity([(100, -1), (100, 2)])
