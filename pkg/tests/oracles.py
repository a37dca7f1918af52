"""Closed-form reference solutions shared by the unit and acceptance tests."""

import math

import numpy as np


def rabi_excited_population(omega0, omega, t0, t):
    """Excited-state population of the equatorial rotating spin started in its
    ground state at ``t0``.

    With ``theta = pi/2`` and ``R = omega t`` the field rotates uniformly in
    the xy plane.  In the frame co-rotating with it the Hamiltonian is the
    constant ``-(omega0 sigma_x + omega sigma_z)/2``, whose propagator is
    ``cos(v tau/2) + i sin(v tau/2) n.sigma`` with ``v = sqrt(omega0^2 +
    omega^2)`` and ``n = (omega0, 0, omega)/v``.  Both instantaneous eigenstates
    are fixed vectors in that frame, ``(1, +-1)/sqrt(2)``.
    """
    t = np.asarray(t, dtype=float)
    v = math.hypot(omega0, omega)
    nx, nz = omega0 / v, omega / v
    half = 0.5 * v * (t - t0)
    c, s = np.cos(half), np.sin(half)
    # propagator applied to (1, 1)/sqrt(2), projected on (1, -1)/sqrt(2)
    up = c + 1j * s * (nz + nx)
    down = c + 1j * s * (nx - nz)
    amp = 0.5 * (up - down)
    return np.abs(amp) ** 2


def linear_increment(theta, omega0, omega, duration):
    """First-order excited amplitude for the regular rotating spin.

    The connections are constant, so the phase rate ``omega0 + cos(theta)
    omega`` is constant and the integral is elementary.
    """
    a10 = 0.5 * math.sin(theta)
    rate = omega0 + math.cos(theta) * omega
    return a10 * omega * (np.exp(1j * rate * duration) - 1.0) / rate
