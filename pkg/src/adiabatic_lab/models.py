"""Driven two-level Hamiltonians.

Two families are provided:

``SpinRotating``
    a spin-1/2 in a field of strength ``omega0`` tilted by ``theta`` whose
    azimuth is ``f(R(t))``::

        H = -(omega0/2) [sin(theta) cos f sx + sin(theta) sin f sy + cos(theta) sz]

``CounterExample``
    ``-U^dagger H U`` built from the rotating model with ``f(R) = R = omega t``,
    where ``U`` is that model's own propagator.  In closed form it is
    ``(omega0/2) L(t).sigma`` with ``L`` precessing about a fixed axis at the
    rate ``varpi = sqrt(omega0^2 + omega^2 + 2 omega omega0 cos(theta))``.

Both families have the constant spectrum ``+-omega0/2``.  Functions accept
scalar or array times.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import linalg
from .errors import ConfigurationError, GaugePoleError

SPIN_ROTATING = "SpinRotating"
COUNTER_EXAMPLE = "CounterExample"
VARIANTS = (SPIN_ROTATING, COUNTER_EXAMPLE)

DEFAULT_CLAMP = 1e-12
GAUGE_POLE_TOL = 1e-12


# -- f(R) variants ---------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    """``f(R) = R``."""

    def to_dict(self):
        return {"kind": "Linear"}


@dataclass(frozen=True)
class Log:
    """``f(R) = ln|R|``; the connection diverges like ``1/R``."""

    def to_dict(self):
        return {"kind": "Log"}


@dataclass(frozen=True)
class Power:
    """``f(R) = |R|**(1 - sigma)`` with ``0 < sigma < 1``."""

    sigma: float

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ConfigurationError(f"Power requires 0 < sigma < 1, got {self.sigma}")

    def to_dict(self):
        return {"kind": "Power", "sigma": self.sigma}


FVariant = Union[Linear, Log, Power]


# -- schedules -------------------------------------------------------------


@dataclass(frozen=True)
class LinearTime:
    """``R(t) = omega t``."""

    omega: float

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ConfigurationError(f"LinearTime requires omega > 0, got {self.omega}")

    def to_dict(self):
        return {"kind": "LinearTime", "omega": self.omega}


@dataclass(frozen=True)
class NonlinearTime:
    """``R(t) = epsilon sign(t) |t|**sigma_t``."""

    epsilon: float
    sigma_t: float

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ConfigurationError(f"NonlinearTime requires epsilon > 0, got {self.epsilon}")
        if not (math.isfinite(self.sigma_t) and self.sigma_t > 0):
            raise ConfigurationError(f"NonlinearTime requires sigma_t > 0, got {self.sigma_t}")

    def to_dict(self):
        return {"kind": "NonlinearTime", "epsilon": self.epsilon, "sigma_t": self.sigma_t}


Schedule = Union[LinearTime, NonlinearTime]


def f_from_dict(d):
    d = dict(d)
    kind = d.pop("kind", None)
    try:
        if kind == "Linear":
            return Linear(**d)
        if kind == "Log":
            return Log(**d)
        if kind == "Power":
            return Power(**d)
    except TypeError as exc:
        raise ConfigurationError(f"bad f block: {exc}") from None
    raise ConfigurationError(f"unknown f kind {kind!r}")


def schedule_from_dict(d):
    d = dict(d)
    kind = d.pop("kind", None)
    try:
        if kind == "LinearTime":
            return LinearTime(**d)
        if kind == "NonlinearTime":
            return NonlinearTime(**d)
    except TypeError as exc:
        raise ConfigurationError(f"bad schedule block: {exc}") from None
    raise ConfigurationError(f"unknown schedule kind {kind!r}")


# -- model description -----------------------------------------------------


@dataclass(frozen=True)
class ModelSpec:
    """Complete description of a driven Hamiltonian and its parameter range.

    ``r_range`` is the fixed parameter window ``[R0, R1]``; the run interval in
    time is whatever the schedule needs to sweep it (see :func:`time_interval`).
    For ``CounterExample`` the window is read in the scaled time ``omega t``.
    """

    variant: str = SPIN_ROTATING
    theta: float = math.pi / 4
    omega0: float = 1.0
    f: FVariant = field(default_factory=Linear)
    schedule: Schedule = field(default_factory=lambda: LinearTime(0.1))
    sign_flip: bool = False
    r_range: tuple = (-2 * math.pi, 2 * math.pi)
    clamp: float = DEFAULT_CLAMP

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if not math.isfinite(self.theta):
            raise ConfigurationError("theta must be finite")
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ConfigurationError(f"omega0 must be > 0, got {self.omega0}")
        if not isinstance(self.f, (Linear, Log, Power)):
            raise ConfigurationError(f"f must be Linear, Log or Power, got {self.f!r}")
        if not isinstance(self.schedule, (LinearTime, NonlinearTime)):
            raise ConfigurationError(f"bad schedule {self.schedule!r}")
        r0, r1 = (float(x) for x in self.r_range)
        if not (math.isfinite(r0) and math.isfinite(r1) and r0 < r1):
            raise ConfigurationError(f"r_range must satisfy R0 < R1, got {self.r_range}")
        object.__setattr__(self, "r_range", (r0, r1))
        if not self.clamp > 0:
            raise ConfigurationError("clamp must be positive")
        if self.variant == COUNTER_EXAMPLE:
            if not isinstance(self.f, Linear):
                raise ConfigurationError("CounterExample is built from f(R) = R only")
            if not isinstance(self.schedule, LinearTime):
                raise ConfigurationError("CounterExample requires a LinearTime schedule")
        elif self.sign_flip:
            raise ConfigurationError("sign_flip applies to CounterExample only")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def with_epsilon(self, epsilon):
        """Copy with the sweep variable set to ``epsilon``.

        Linear schedules use ``omega = epsilon * omega0``; nonlinear schedules
        take ``epsilon`` as the prefactor of ``R(t)``.
        """
        s = self.schedule
        if isinstance(s, LinearTime):
            return self.replace(schedule=LinearTime(epsilon * self.omega0))
        return self.replace(schedule=NonlinearTime(epsilon, s.sigma_t))

    @property
    def sweep_variable(self):
        s = self.schedule
        if isinstance(s, LinearTime):
            return s.omega / self.omega0
        return s.epsilon

    def to_dict(self):
        d = {
            "variant": self.variant,
            "theta": self.theta,
            "omega0": self.omega0,
            "f": self.f.to_dict(),
            "schedule": self.schedule.to_dict(),
            "sign_flip": self.sign_flip,
            "r_range": list(self.r_range),
            "clamp": self.clamp,
        }
        return d

    @classmethod
    def from_dict(cls, d):
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigurationError(f"unknown model keys: {sorted(unknown)}")
        kw = dict(d)
        if "f" in kw:
            kw["f"] = f_from_dict(kw["f"])
        if "schedule" in kw:
            kw["schedule"] = schedule_from_dict(kw["schedule"])
        if "r_range" in kw:
            rr = kw["r_range"]
            if len(rr) != 2:
                raise ConfigurationError("r_range needs two entries")
            kw["r_range"] = tuple(rr)
        return cls(**kw)


# -- schedules and f -------------------------------------------------------


def schedule_eval(s, t):
    """Return ``(R, dR/dt)`` at time(s) ``t``.

    For a nonlinear schedule with ``sigma_t < 1`` the rate at ``t = 0`` is
    reported as ``+inf``.
    """
    t = np.asarray(t, dtype=float)
    if isinstance(s, LinearTime):
        R = s.omega * t
        return _out(R), _out(np.full_like(t, s.omega))
    a = np.abs(t)
    R = s.epsilon * np.sign(t) * a**s.sigma_t
    with np.errstate(divide="ignore"):
        if s.sigma_t == 1.0:
            rate = np.full_like(t, s.epsilon)
        else:
            rate = np.where(
                a > 0,
                s.epsilon * s.sigma_t * a ** (s.sigma_t - 1.0),
                np.inf if s.sigma_t < 1.0 else 0.0,
            )
    return _out(R), _out(rate)


def schedule_time(s, R):
    """Time at which the schedule reaches parameter value ``R``."""
    R = np.asarray(R, dtype=float)
    if isinstance(s, LinearTime):
        return _out(R / s.omega)
    return _out(np.sign(R) * (np.abs(R) / s.epsilon) ** (1.0 / s.sigma_t))


def f_eval(f, R, clamp=DEFAULT_CLAMP):
    """Return ``(f(R), df/dR)``; ``|R|`` is clamped below at ``clamp`` for the
    singular variants."""
    R = np.asarray(R, dtype=float)
    if isinstance(f, Linear):
        return _out(R.copy()), _out(np.ones_like(R))
    sgn = np.where(R < 0, -1.0, 1.0)
    a = np.maximum(np.abs(R), clamp)
    if isinstance(f, Log):
        return _out(np.log(a)), _out(sgn / a)
    p = 1.0 - f.sigma
    return _out(a**p), _out(p * sgn * a ** (-f.sigma))


def is_clamped(spec, R):
    if isinstance(spec.f, Linear):
        return np.zeros(np.shape(R), dtype=bool)
    return np.abs(np.asarray(R)) < spec.clamp


def _out(x):
    return x[()] if isinstance(x, np.ndarray) and x.ndim == 0 else x


# -- run interval ----------------------------------------------------------


def time_interval(spec):
    """Run interval ``(t0, t1)`` over which ``R(t)`` sweeps ``spec.r_range``."""
    r0, r1 = spec.r_range
    t0, t1 = schedule_time(spec.schedule, np.array([r0, r1]))
    return float(t0), float(t1)


def breakpoints(spec, t0=None, t1=None):
    """Interior times where the drive is not smooth (``R = 0`` for singular
    ``f`` or a nonlinear schedule); the integrator lands a step on each."""
    if t0 is None:
        t0, t1 = time_interval(spec)
    lo, hi = min(t0, t1), max(t0, t1)
    rough = not isinstance(spec.f, Linear) or (
        isinstance(spec.schedule, NonlinearTime) and spec.schedule.sigma_t != 1.0
    )
    if spec.variant == SPIN_ROTATING and rough and lo < 0.0 < hi:
        return np.array([0.0])
    return np.array([])


# -- Hamiltonians ----------------------------------------------------------


def _spin_field(spec, R):
    fv, _ = f_eval(spec.f, R, spec.clamp)
    st, ct = math.sin(spec.theta), math.cos(spec.theta)
    fv = np.asarray(fv)
    n = np.stack([st * np.cos(fv), st * np.sin(fv), np.full_like(fv, ct)], axis=-1)
    return -(spec.omega0 / 2) * n


def precession_axis(spec):
    """Unit axis ``u`` and rate ``varpi`` of the counterexample's ``L(t)``."""
    w0, w, th = spec.omega0, spec.schedule.omega, spec.theta
    varpi = math.sqrt(w0 * w0 + w * w + 2 * w * w0 * math.cos(th))
    u = np.array([w0 * math.sin(th), 0.0, w0 * math.cos(th) + w]) / varpi
    return u, varpi


def l_vector(spec, t):
    """Unit vector ``L(t)`` of the counterexample and the rate ``varpi``.

    The closed form is a rotation of ``(sin theta, 0, cos theta)`` by
    ``varpi t`` about :func:`precession_axis`; components::

        L1 = sin(th) (w0^2 + 2 w w0 cos(th) cos^2(vt/2) + w^2 cos(vt)) / v^2
        L2 = (w sin(th) / v) sin(vt)
        L3 = cos(th) + (2 w w0 sin^2(th) / v^2) sin^2(vt/2)
    """
    if spec.variant != COUNTER_EXAMPLE:
        raise TypeError("l_vector is defined for the CounterExample variant only")
    w0, w, th = spec.omega0, spec.schedule.omega, spec.theta
    _, varpi = precession_axis(spec)
    t = np.asarray(t, dtype=float)
    phase = varpi * t
    st, ct = math.sin(th), math.cos(th)
    v2 = varpi * varpi
    L1 = st * (w0 * w0 + 2 * w * w0 * ct * np.cos(phase / 2) ** 2 + w * w * np.cos(phase)) / v2
    L2 = (w * st / varpi) * np.sin(phase)
    L3 = ct + (2 * w * w0 * st * st / v2) * np.sin(phase / 2) ** 2
    L = np.stack([L1, L2, L3], axis=-1)
    L = L / np.linalg.norm(L, axis=-1, keepdims=True)
    return L, varpi


def l_dot(spec, t):
    """Time derivative of :func:`l_vector`, ``varpi u x L``."""
    u, varpi = precession_axis(spec)
    L, _ = l_vector(spec, t)
    return varpi * np.cross(u, L)


def pauli_vector(spec, t):
    """Real field ``h(t)`` with ``H(t) = h . sigma``."""
    if spec.variant == SPIN_ROTATING:
        R, _ = schedule_eval(spec.schedule, t)
        return _spin_field(spec, R)
    L, _ = l_vector(spec, t)
    sign = -1.0 if spec.sign_flip else 1.0
    return sign * (spec.omega0 / 2) * L


def hamiltonian_at(spec, t):
    """``H(t)`` as a complex ``(..., 2, 2)`` array."""
    return linalg.from_pauli(1.0, pauli_vector(spec, t))


def hamiltonian_at_parameter(spec, R):
    """``H`` as a function of the slowly varying parameter.

    For ``SpinRotating`` that is ``R``; for ``CounterExample`` the
    Hamiltonian depends on time directly, so the argument is ``t``.
    """
    if spec.variant == SPIN_ROTATING:
        return linalg.from_pauli(1.0, _spin_field(spec, R))
    return hamiltonian_at(spec, R)


# -- eigensystems ----------------------------------------------------------


def _spin_vectors(spec, R):
    fv, _ = f_eval(spec.f, R, spec.clamp)
    fv = np.asarray(fv)
    c, s = math.cos(spec.theta / 2), math.sin(spec.theta / 2)
    em, ep = np.exp(-0.5j * fv), np.exp(0.5j * fv)
    ground = np.stack([c * em, s * ep], axis=-1)
    excited = np.stack([s * em, -c * ep], axis=-1)
    return np.stack([ground, excited], axis=-2)


def _ce_vectors(spec, t):
    L, _ = l_vector(spec, t)
    L1, L2, L3 = L[..., 0], L[..., 1], L[..., 2]
    if np.any(np.abs(L3) >= 1.0 - GAUGE_POLE_TOL):
        raise GaugePoleError("L3 = +-1: the azimuthal gauge is undefined")
    phi = 0.5 * np.arctan2(L2, L1)
    a = np.sqrt((1 - L3) / 2)
    b = np.sqrt((1 + L3) / 2)
    em, ep = np.exp(-1j * phi), np.exp(1j * phi)
    along = np.stack([b * em, a * ep], axis=-1)  # +1 eigenvector of L.sigma
    against = np.stack([a * em, -b * ep], axis=-1)  # -1 eigenvector
    if spec.sign_flip:
        return np.stack([along, against], axis=-2)
    return np.stack([against, along], axis=-2)


def eigenvectors_at_parameter(spec, R):
    """Analytic-gauge eigenvectors as a function of the slow parameter
    (``R`` for SpinRotating, ``t`` for CounterExample); layout as
    :func:`linalg.eig2`."""
    if spec.variant == SPIN_ROTATING:
        return _spin_vectors(spec, R)
    return _ce_vectors(spec, R)


def eigensystem_analytic(spec, t):
    """Closed-form ``(energies, vectors)`` at time(s) ``t``.

    Energies are ``[-omega0/2, +omega0/2]``; vectors use the smooth analytic
    gauge (half-angle azimuthal phases).  Raises :class:`GaugePoleError` for
    the counterexample when ``|L3| -> 1``.
    """
    t = np.asarray(t, dtype=float)
    if spec.variant == SPIN_ROTATING:
        R, _ = schedule_eval(spec.schedule, t)
        vectors = _spin_vectors(spec, R)
    else:
        vectors = _ce_vectors(spec, t)
    e = spec.omega0 / 2
    energies = np.broadcast_to(np.array([-e, e]), vectors.shape[:-1]).copy()
    return energies, vectors


def eigensystem(spec, t):
    """Analytic eigensystem where defined, otherwise :func:`linalg.eig2`."""
    try:
        return eigensystem_analytic(spec, t)
    except GaugePoleError:
        return linalg.eig2(hamiltonian_at(spec, t))


def ground_state(spec, t):
    _, vectors = eigensystem(spec, float(t))
    return vectors[0].copy()


# -- kernel packing --------------------------------------------------------

F_CODES = {Linear: 0, Log: 1, Power: 2}


def kernel_args(spec):
    """Flatten a spec into the integer codes and float parameters used by the
    compiled right-hand side."""
    s = spec.schedule
    codes = np.array(
        [
            0 if spec.variant == SPIN_ROTATING else 1,
            F_CODES[type(spec.f)],
            0 if isinstance(s, LinearTime) else 1,
        ],
        dtype=np.int64,
    )
    params = np.array(
        [
            spec.theta,
            spec.omega0,
            s.omega if isinstance(s, LinearTime) else 0.0,
            spec.f.sigma if isinstance(spec.f, Power) else 0.0,
            s.epsilon if isinstance(s, NonlinearTime) else 0.0,
            s.sigma_t if isinstance(s, NonlinearTime) else 1.0,
            -1.0 if spec.sign_flip else 1.0,
            spec.clamp,
        ]
    )
    return codes, params
