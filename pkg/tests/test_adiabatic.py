import math
import types

import numpy as np
import pytest

from adiabatic_lab import adiabatic, integrate, models
from adiabatic_lab.errors import DegenerateSpectrumError
from adiabatic_lab.models import LinearTime, Log, ModelSpec, NonlinearTime, Power

from oracles import linear_increment


def test_adiabatic_parameter_linear():
    assert adiabatic.adiabatic_parameter(ModelSpec(omega0=2.0, schedule=LinearTime(0.1))) == pytest.approx(0.05)


def test_adiabatic_parameter_nonlinear_peaks_at_endpoints():
    spec = ModelSpec(schedule=NonlinearTime(0.01, 2.0))
    T = math.sqrt(2 * math.pi / 0.01)
    assert adiabatic.adiabatic_parameter(spec) == pytest.approx(2 * 0.01 * T)


def test_adiabatic_parameter_flags_unbounded_rate():
    spec = ModelSpec(schedule=NonlinearTime(0.1, 0.5))
    with pytest.warns(RuntimeWarning):
        eps, unbounded = adiabatic.adiabatic_parameter(spec, full_output=True)
    assert unbounded and math.isfinite(eps)


@pytest.mark.parametrize(
    "spec",
    [ModelSpec(), ModelSpec(f=Power(0.25)), ModelSpec(f=Log()), ModelSpec(variant="CounterExample")],
)
def test_populations_are_complete(spec):
    tr = integrate.propagate_model(spec, n_samples=1025)
    c0, c1 = adiabatic.coefficients(tr)
    assert np.max(np.abs(c0 + c1 - 1)) <= 1e-10
    series, f_min = adiabatic.fidelity(tr)
    np.testing.assert_allclose(series, c0)
    assert f_min <= series.min()


@pytest.mark.parametrize("theta", [math.pi / 4, 1.2])
def test_geometric_phase_of_regular_path(theta):
    spec = ModelSpec(theta=theta)
    frame = adiabatic.build_frame(integrate.propagate_model(spec, n_samples=4097))
    # alpha00 = cos(theta)/2 is constant, so gamma = cos(theta)/2 * (R1 - R0)
    assert frame.geometric_phase[-1] == pytest.approx(0.5 * math.cos(theta) * 4 * math.pi, abs=1e-7)
    np.testing.assert_allclose(frame.dynamical_phase, -0.5 * (frame.t - frame.t[0]), atol=1e-9)
    assert frame.min_overlap > 0.99
    np.testing.assert_allclose(frame.gap, 1.0)


def test_aligned_frame_has_positive_overlaps():
    spec = ModelSpec(variant="CounterExample")
    frame = adiabatic.build_frame(integrate.propagate_model(spec, n_samples=513))
    ov = np.einsum("kni,kni->kn", frame.aligned[:-1].conj(), frame.aligned[1:])
    assert np.all(np.abs(ov.imag) < 1e-12)
    assert np.all(ov.real > 0)


def test_adiabatic_state_is_the_phased_ground_state():
    frame = adiabatic.build_frame(integrate.propagate_model(ModelSpec(f=Power(0.5)), n_samples=257))
    state = adiabatic.adiabatic_state(frame)
    overlap = np.einsum("ki,ki->k", frame.reference[:, 0].conj(), state)
    np.testing.assert_allclose(np.abs(overlap), 1.0, atol=1e-14)


def test_degenerate_spectrum_is_rejected():
    fake = types.SimpleNamespace(
        t=np.array([0.0, 1.0]),
        energies=np.zeros((2, 2)),
        vectors=np.broadcast_to(np.eye(2, dtype=complex), (2, 2, 2)),
    )
    with pytest.raises(DegenerateSpectrumError):
        adiabatic.build_frame(fake)


def test_first_order_increment_regular_case():
    spec = ModelSpec(schedule=LinearTime(0.05))
    t0, t1 = models.time_interval(spec)
    expected = linear_increment(spec.theta, 1.0, 0.05, t1 - t0)
    assert abs(adiabatic.first_order_increment(spec) - expected) < 1e-9


def test_first_order_profile_bounds_the_infidelity():
    spec = ModelSpec(schedule=LinearTime(0.05))
    tr = integrate.propagate_model(spec, n_samples=4097)
    prof = adiabatic.first_order_profile(spec, tr.t)
    assert prof[0] == 0
    predicted = np.max(np.abs(prof) ** 2)
    assert predicted == pytest.approx(1 - tr.f_min, rel=0.05)


def test_first_order_increment_with_removable_singularity_is_finite():
    spec = ModelSpec(f=Power(0.5), schedule=LinearTime(0.05))
    inc = adiabatic.first_order_increment(spec)
    assert math.isfinite(abs(inc)) and 0 < abs(inc) < 1


def test_fidelity_is_gauge_invariant(rng):
    tr = integrate.propagate_model(ModelSpec(f=Power(0.5)), n_samples=513)
    before, _ = adiabatic.coefficients(tr)
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=tr.vectors.shape[:2]))
    tr.vectors = tr.vectors * phases[..., None]
    after, _ = adiabatic.coefficients(tr)
    assert np.max(np.abs(after - before)) <= 1e-15


def test_untilted_field_gives_constant_adiabatic_state():
    # the analytic gauge carries exp(-i f/2) even at theta = 0; the phased
    # adiabatic state is gauge invariant and must not move
    spec = ModelSpec(theta=0.0, schedule=LinearTime(0.2))
    frame = adiabatic.build_frame(integrate.propagate_model(spec, n_samples=257))
    state = adiabatic.adiabatic_state(frame) * np.exp(1j * frame.dynamical_phase)[:, None]
    # finite-difference phase error at 257 samples (edge stencils are second order)
    np.testing.assert_allclose(state, np.broadcast_to(state[0], state.shape), atol=1e-5)
    np.testing.assert_allclose(frame.dynamical_phase[-1], -0.5 * (frame.t[-1] - frame.t[0]))


@pytest.mark.parametrize("theta", [0.3, math.pi / 4, 2.0])
def test_closed_loop_holonomy(theta):
    spec = ModelSpec(theta=theta, schedule=LinearTime(0.1), r_range=(0.0, 2 * math.pi))
    frame = adiabatic.build_frame(integrate.propagate_model(spec, n_samples=2049))
    ref = frame.reference[:, 0]
    holonomy = frame.geometric_phase[-1] + np.angle(np.vdot(ref[0], ref[-1]))
    expected = -math.pi * (1 - math.cos(theta))
    assert abs(np.angle(np.exp(1j * (holonomy - expected)))) < 1e-6
