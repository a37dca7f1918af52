"""Adiabatic reference quantities along a propagated trajectory.

The adiabatic approximation keeps the state in the instantaneous ground state
up to a dynamical phase ``-int E_0 dt`` and a geometric phase
``gamma_0 = i int <E_0|dE_0/dt> dt``.  Its fidelity with the exact state is
``|<E_0|psi>|^2 = |C_0|^2``; the overall phases cancel in the modulus.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid, solve_ivp

from . import berry, models
from .errors import DegenerateSpectrumError


def adiabatic_parameter(spec, n_grid=4096, full_output=False):
    """``max |dR/dt| / gap`` over the run interval.

    The gap is the constant ``omega0`` for both model families.  For a
    nonlinear schedule with ``sigma_t < 1`` the rate diverges at ``t = 0``;
    the maximum is then taken over a grid that excludes the origin and the
    result is flagged as unbounded.

    Returns ``epsilon`` or, with ``full_output``, ``(epsilon, unbounded)``.
    """
    s = spec.schedule
    unbounded = False
    if isinstance(s, models.LinearTime):
        eps = s.omega / spec.omega0
    else:
        t0, t1 = models.time_interval(spec)
        grid = np.linspace(t0, t1, n_grid)
        grid = grid[grid != 0.0]
        _, rate = models.schedule_eval(s, grid)
        eps = float(np.max(np.abs(rate))) / spec.omega0
        unbounded = s.sigma_t < 1.0
        if unbounded:
            warnings.warn("dR/dt is unbounded at t = 0; returning the grid maximum", RuntimeWarning)
    return (eps, unbounded) if full_output else eps


@dataclass
class AdiabaticFrame:
    """Gauge-continuous instantaneous basis along a trajectory.

    ``aligned[k, n]`` is eigenvector ``n`` at ``t[k]`` transported so that
    successive overlaps are real and positive.  ``geometric_phase`` is
    ``gamma_0(t_k)`` in the reference (analytic) gauge of the trajectory;
    ``dynamical_phase`` is ``int E_0 dt``.
    """

    t: np.ndarray
    reference: np.ndarray
    aligned: np.ndarray
    energies: np.ndarray
    dynamical_phase: np.ndarray
    geometric_phase: np.ndarray
    #: largest |arg <E_n(t_k)|E_n(t_k+1)>| in the reference gauge
    gauge_step_max: float
    #: smallest |<E_n(t_k)|E_n(t_k+1)>|; values near 1 mean fine sampling
    min_overlap: float
    #: largest difference between the 3- and 5-point derivative estimates
    richardson_residual: float

    @property
    def gap(self):
        return self.energies[:, 1] - self.energies[:, 0]


def parallel_align(vectors):
    """Phase-align a path of eigenvectors, shape ``(K, N, dim)``, so that
    ``<v_k|v_k+1>`` is real and positive for every level."""
    v = np.array(vectors, dtype=complex)
    ov = np.einsum("kni,kni->kn", v[:-1].conj(), v[1:])
    phase = np.where(np.abs(ov) > 0, np.abs(ov) / np.where(ov == 0, 1, ov), 1.0)
    v[1:] *= np.cumprod(phase, axis=0)[..., None]
    return v


def _connection_rate(t, v):
    """``<v|dv/dt>`` for the ground-state path by central differences with one
    Richardson step (5-point stencil in the interior)."""
    dv3 = np.gradient(v, t, axis=0, edge_order=2)
    dv5 = dv3.copy()
    if len(t) >= 5:
        h = np.diff(t)
        uniform = np.allclose(h, h[0], rtol=1e-9, atol=0.0)
        if uniform:
            dt = h[0]
            dv5[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * dt)
    a3 = np.einsum("ki,ki->k", v.conj(), dv3)
    a5 = np.einsum("ki,ki->k", v.conj(), dv5)
    return a5, float(np.max(np.abs(a5 - a3)))


def build_frame(traj):
    """Instantaneous frame, phases and continuity diagnostics for a trajectory."""
    t = np.asarray(traj.t, dtype=float)
    if len(t) < 2:
        raise ValueError("need at least two samples")
    energies = np.asarray(traj.energies)
    if np.min(energies[:, 1] - energies[:, 0]) < 1e-10:
        raise DegenerateSpectrumError("instantaneous gap below 1e-10")
    ref = np.asarray(traj.vectors)
    ov = np.einsum("kni,kni->kn", ref[:-1].conj(), ref[1:])
    aligned = parallel_align(ref)

    rate, rich = _connection_rate(t, ref[:, 0])
    integrand = -rate.imag  # i <E|dE/dt> is real: i * (i Im) = -Im
    if len(t) >= 3:
        geo = cumulative_simpson(integrand, x=t, initial=0.0)
    else:
        geo = cumulative_trapezoid(integrand, t, initial=0.0)
    dyn = cumulative_trapezoid(energies[:, 0], t, initial=0.0)
    return AdiabaticFrame(
        t=t,
        reference=ref,
        aligned=aligned,
        energies=energies,
        dynamical_phase=dyn,
        geometric_phase=geo,
        gauge_step_max=float(np.max(np.abs(np.angle(ov)))),
        min_overlap=float(np.min(np.abs(ov))),
        richardson_residual=rich,
    )


def adiabatic_state(frame):
    """``exp(-i int E_0) exp(i gamma_0) |E_0>`` at every sample."""
    ph = np.exp(-1j * frame.dynamical_phase + 1j * frame.geometric_phase)
    return ph[:, None] * frame.reference[:, 0]


def coefficients(traj):
    """``(|C_0|^2, |C_1|^2)`` in the instantaneous eigenbasis."""
    c = np.einsum("kni,ki->kn", np.asarray(traj.vectors).conj(), traj.psi)
    p = np.abs(c) ** 2
    return p[:, 0], p[:, 1]


def fidelity(traj):
    """Adiabatic fidelity series and its minimum.

    The minimum folds in the propagator's step-resolution running minimum
    (refined by golden-section search), so it is not limited by sampling.
    """
    series, _ = coefficients(traj)
    f_min = min(float(np.min(series)), float(getattr(traj, "f_min", np.inf)))
    return series, f_min


# -- first-order theory ----------------------------------------------------


def _increment_rhs(spec):
    gap = spec.omega0
    ce = spec.variant == models.COUNTER_EXAMPLE

    def rhs(t, y):
        if ce:
            c = berry.connection_analytic(spec, t)
            rate = 1.0
        else:
            R, rate = models.schedule_eval(spec.schedule, t)
            if models.is_clamped(spec, R) or not math.isfinite(rate):
                return [gap, 0.0, 0.0]
            c = berry.connection_analytic(spec, R)
        phase_rate = gap - (c.alpha11 - c.alpha00) * rate
        drive = 1j * np.exp(1j * y[0]) * c.alpha10 * rate
        return [float(phase_rate), float(drive.real), float(drive.imag)]

    return rhs


def _solve_increment(spec, t0, t1, t_eval=None, rtol=1e-10, atol=1e-12):
    # split at breakpoints so the quadrature never straddles a singular point
    inner = sorted(models.breakpoints(spec, t0, t1), reverse=bool(t1 < t0))
    edges = [t0, *inner, t1]
    rhs = _increment_rhs(spec)
    y = np.zeros(3)
    pieces = []
    ok = True
    for a, b in zip(edges[:-1], edges[1:]):
        sol = solve_ivp(rhs, (a, b), y, method="DOP853", rtol=rtol, atol=atol, dense_output=True)
        ok = ok and sol.success
        pieces.append((min(a, b), max(a, b), sol.sol))
        y = sol.y[:, -1]
    if not ok:
        warnings.warn("first-order increment quadrature did not converge", RuntimeWarning)
    profile = None
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        profile = np.empty((3, len(t_eval)))
        for lo, hi, dense in pieces:
            m = (t_eval >= lo) & (t_eval <= hi)
            if np.any(m):
                profile[:, m] = dense(t_eval[m])
    return y, profile, ok


def first_order_increment(spec, t0=None, t1=None, rtol=1e-10, atol=1e-12):
    """First-order excited-state amplitude accumulated from ``t0`` to ``t1``.

    The coefficient equation is evaluated with the ground-state amplitude
    frozen at 1::

        dC_1/dt = i exp(i Theta) alpha_10 dR/dt,
        dTheta/dt = (E_1 - alpha_11 dR/dt) - (E_0 - alpha_00 dR/dt)

    and integrated adaptively (DOP853) to the requested tolerance.  Defaults
    to the spec's full run interval.
    """
    if t0 is None:
        t0, t1 = models.time_interval(spec)
    y, _, _ = _solve_increment(spec, t0, t1, rtol=rtol, atol=atol)
    return complex(y[1], y[2])


def first_order_profile(spec, t_eval, rtol=1e-10, atol=1e-12):
    """First-order increment ``Delta C_1(t)`` at each time in ``t_eval``
    (integration starts at ``t_eval[0]``)."""
    t_eval = np.asarray(t_eval, dtype=float)
    _, prof, _ = _solve_increment(spec, t_eval[0], t_eval[-1], t_eval, rtol, atol)
    return prof[1] + 1j * prof[2]
