import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiabatic_lab import adiabatic, sweep
from adiabatic_lab.errors import InsufficientDataError
from adiabatic_lab.integrate import IntegratorConfig
from adiabatic_lab.models import Linear, LinearTime, Log, ModelSpec, NonlinearTime, Power
from adiabatic_lab.sweep import SweepRecord


def records(eps, infid):
    return [SweepRecord(e, 1 - i, i) for e, i in zip(eps, infid)]


@pytest.mark.parametrize(
    "spec, expected",
    [
        (ModelSpec(), 2.0),
        (ModelSpec(f=Power(0.25)), 1.5),
        (ModelSpec(f=Power(0.75)), 0.5),
        (ModelSpec(f=Log()), None),
        (ModelSpec(schedule=NonlinearTime(0.1, 2.0)), 1.0),
        (ModelSpec(schedule=NonlinearTime(0.1, 3.0)), 2 / 3),
        (ModelSpec(schedule=NonlinearTime(0.1, 0.5)), 2.0),
        (ModelSpec(variant="CounterExample"), None),
    ],
)
def test_predicted_exponent(spec, expected):
    assert sweep.predicted_exponent(spec) == (expected if expected is None else pytest.approx(expected))


def test_fit_recovers_exact_power_law():
    eps = np.geomspace(1e-3, 1e-1, 7)
    fit = sweep.fit_power_law(records(eps, 0.3 * eps**1.5))
    assert fit.slope == pytest.approx(1.5)
    assert fit.intercept == pytest.approx(math.log(0.3))
    assert fit.r_squared == pytest.approx(1.0)
    assert not fit.outlier_excluded


def test_fit_drops_noise_floor_points():
    eps = np.geomspace(1e-3, 1e-1, 6)
    infid = eps**2
    infid[0] = 1e-12
    fit = sweep.fit_power_law(records(eps, infid))
    assert fit.noise_floor_excluded == 1
    assert fit.n_points_used == 5
    assert fit.slope == pytest.approx(2.0)


def test_fit_guards_against_preasymptotic_last_point():
    eps = np.geomspace(1e-3, 1e-1, 8)
    infid = eps**2 * (1 + 0.01 * np.sin(np.arange(8)))
    infid[-1] *= 5
    fit = sweep.fit_power_law(records(eps, infid))
    assert fit.outlier_excluded
    assert fit.slope == pytest.approx(2.0, abs=0.02)


def test_fit_needs_three_points():
    with pytest.raises(InsufficientDataError):
        sweep.fit_power_law(records([0.1, 0.01], [1e-2, 1e-4]))


def test_breakdown_check_verdicts():
    eps = np.geomspace(1e-3, 1e-1, 10)
    plateau = [SweepRecord(e, 0.5 + 1e-4 * i, 0.5) for i, e in enumerate(eps)]
    assert sweep.breakdown_check(plateau) == sweep.BREAKDOWN
    assert sweep.breakdown_check(records(eps, eps**2)) == sweep.CONVERGING
    assert sweep.breakdown_check(plateau[:2]) == sweep.INCONCLUSIVE
    # less than a decade of epsilon cannot show a plateau
    assert sweep.breakdown_check(plateau[:3]) == sweep.INCONCLUSIVE
    # a plateau above the threshold is not a breakdown
    high = [SweepRecord(e, 0.95, 0.05) for e in eps]
    assert sweep.breakdown_check(high) == sweep.CONVERGING


@given(
    st.lists(
        st.tuples(
            st.floats(1e-12, 1.0),
            st.floats(0.0, 1.0),
            st.integers(0, 10**6),
            st.integers(0, 10**9),
        ),
        min_size=1,
        max_size=8,
    )
)
@settings(max_examples=50, deadline=None)
def test_csv_round_trip_is_exact(rows):
    recs = [SweepRecord(e, f, 1 - f, c, s) for e, f, c, s in rows]
    assert sweep.read_csv(sweep.to_csv(recs)) == recs


def test_run_sweep_is_sorted_and_parallel_safe():
    spec = ModelSpec(schedule=LinearTime(0.1))
    grid = [0.1, 0.02, 0.05]
    serial = sweep.run_sweep(spec, grid)
    parallel = sweep.run_sweep(spec, grid, jobs=3)
    assert [r.epsilon for r in serial] == [0.02, 0.05, 0.1]
    assert serial == parallel


def test_run_sweep_rejects_bad_grids():
    with pytest.raises(ValueError):
        sweep.run_sweep(ModelSpec(), [0.1, -0.1])
    with pytest.raises(ValueError):
        sweep.run_sweep(ModelSpec(), [0.1, 0.1])


def test_failed_point_is_recorded():
    recs = sweep.run_sweep(ModelSpec(), [0.1], IntegratorConfig(max_steps=10))
    assert recs[0].error and "budget" in recs[0].error
    assert math.isnan(recs[0].f_min)


def test_default_grids():
    lin = sweep.default_grid(ModelSpec())
    assert len(lin) == 10 and lin[0] == pytest.approx(0.1) and lin[-1] == pytest.approx(1e-3)
    nl = sweep.default_grid(ModelSpec(schedule=NonlinearTime(0.1, 2.0)))
    assert len(nl) == 8 and nl[-1] == pytest.approx(3e-3)


@pytest.mark.parametrize("sigma_t", [1.5, 2.0, 3.0])
def test_rate_matched_grid_spans_requested_rates(sigma_t):
    spec = ModelSpec(schedule=NonlinearTime(0.1, sigma_t))
    grid = sweep.rate_matched_grid(spec, 1e-1, 1e-3, 5)
    rates = [adiabatic.adiabatic_parameter(spec.with_epsilon(e)) for e in grid]
    np.testing.assert_allclose(rates, np.geomspace(1e-1, 1e-3, 5), rtol=1e-9)


def test_rate_matched_grid_needs_superlinear_schedule():
    with pytest.raises(ValueError):
        sweep.rate_matched_grid(ModelSpec(schedule=NonlinearTime(0.1, 0.5)))
    with pytest.raises(ValueError):
        sweep.rate_matched_grid(ModelSpec(f=Linear()))
