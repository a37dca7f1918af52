"""Adaptive Runge-Kutta propagation of ``i dpsi/dt = H(t) psi``.

The stepper is the Dormand-Prince 5(4) pair with PI step-size control.  Sample
times are landed on exactly by step endpoints rather than interpolated, and
the fidelity with the instantaneous ground state is tracked at every accepted
step so that its minimum is not limited by the sample spacing.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels, models
from .errors import ConfigurationError, IntegrationError


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float = 1e-3
    h_min: float = 1e-12
    max_steps: int = 10**8
    renorm: bool = True
    #: if set, take fixed steps of this size with no error control
    fixed_step: float | None = None

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ConfigurationError("rtol and atol must be positive")
        if not 0 < self.h_min <= self.h_init:
            raise ConfigurationError("need 0 < h_min <= h_init")
        if self.max_steps < 1:
            raise ConfigurationError("max_steps must be positive")
        if self.fixed_step is not None and not self.fixed_step > 0:
            raise ConfigurationError("fixed_step must be positive")

    def tightened(self, factor):
        return dataclasses.replace(self, rtol=self.rtol / factor, atol=self.atol / factor)

    def to_dict(self):
        return {
            "rtol": self.rtol,
            "atol": self.atol,
            "h_init": self.h_init,
            "h_min": self.h_min,
            "max_steps": self.max_steps,
            "renorm": self.renorm,
            "fixed_step": self.fixed_step,
        }


@dataclass
class Diagnostics:
    steps: int = 0
    rejections: int = 0
    clamp_hits: int = 0
    fevals: int = 0
    #: largest per-step ``| ||psi||^2 - 1 |`` seen before renormalisation
    max_norm_drift: float = 0.0
    #: sum of ``|log|| of the rescale factors applied
    log_rescale: float = 0.0

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Trajectory:
    """Sampled solution of one propagation.

    ``vectors[k, n]`` is the instantaneous eigenvector ``n`` (0 = ground) at
    ``t[k]`` in the analytic gauge of the model (or the :func:`linalg.eig2`
    gauge near a gauge pole).
    """

    spec: models.ModelSpec
    t: np.ndarray
    R: np.ndarray
    psi: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    norm_err: np.ndarray
    f_min: float
    t_min: float
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    @property
    def fidelity(self):
        """``|<E_0(t_k)|psi(t_k)>|^2`` at every sample."""
        return np.abs(np.einsum("ki,ki->k", self.vectors[:, 0].conj(), self.psi)) ** 2

    def __len__(self):
        return len(self.t)


def _run_kernel(spec, psi0, targets, cfg):
    codes, params = models.kernel_args(spec)
    fixed = cfg.fixed_step if cfg.fixed_step is not None else 0.0
    return _kernels.propagate_kernel(
        codes,
        params,
        np.ascontiguousarray(psi0, dtype=np.complex128),
        np.ascontiguousarray(targets, dtype=float),
        cfg.rtol,
        cfg.atol,
        cfg.h_init,
        cfg.h_min,
        int(cfg.max_steps),
        bool(cfg.renorm),
        float(fixed),
    )


def _state_at(spec, t_from, psi_from, t_to, cfg):
    if t_to == t_from:
        return np.asarray(psi_from)
    psi_at, _, n, status, *_ = _run_kernel(spec, psi_from, np.array([t_from, t_to]), cfg)
    if status != _kernels.OK:
        raise IntegrationError("refinement propagation failed")
    return psi_at[1]


def ground_fidelity(spec, t, psi):
    """Fidelity of ``psi`` with the instantaneous ground state at ``t``."""
    codes, params = models.kernel_args(spec)
    hx, hy, hz, _ = _kernels.field(float(t), codes, params)
    return _kernels.ground_overlap(hx, hy, hz, complex(psi[0]), complex(psi[1]))


def refine_minimum(spec, cfg, t_left, psi_left, t_mid, t_right, xtol=1e-6):
    """Golden-section search for the fidelity minimum inside a bracket.

    The fidelity at each trial time comes from re-propagating ``psi_left``
    from ``t_left``; the bracket is a couple of steps wide, so each trial is
    cheap.  Returns ``(t_min, f_min)``.
    """

    def fid(t):
        return ground_fidelity(spec, t, _state_at(spec, t_left, psi_left, t, cfg))

    fl, fm, fr = fid(t_left), fid(t_mid), fid(t_right)
    if not (fm < fl and fm < fr):
        return t_mid, fm
    scale = max(abs(t_left), abs(t_right), 1.0)
    res = minimize_scalar(
        fid,
        bracket=(t_left, t_mid, t_right),
        method="golden",
        options={"xtol": xtol / scale},
    )
    if res.fun < fm:
        return float(res.x), float(res.fun)
    return t_mid, fm


def propagate(spec, psi0, t0, t1, cfg=None, n_samples=4096, refine=True):
    """Solve the Schroedinger equation for ``spec`` from ``t0`` to ``t1``.

    Parameters
    ----------
    spec : ModelSpec
    psi0 : array_like, shape (2,)
        Initial state, unit norm.
    t0, t1 : float
        Start and end times; ``t1 < t0`` integrates backwards.
    cfg : IntegratorConfig, optional
    n_samples : int
        Number of evenly spaced sample times (endpoints included).
    refine : bool
        Refine the running fidelity minimum by golden-section search.

    Raises
    ------
    IntegrationError
        On step-size underflow or an exhausted step budget.  The samples
        reached so far are attached as ``exc.trajectory``.
    """
    cfg = cfg or IntegratorConfig()
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.vdot(psi0, psi0).real - 1.0) > 1e-12:
        raise ValueError("psi0 must be normalised")
    if t0 == t1:
        raise ValueError("t0 and t1 must differ")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")

    samples = np.linspace(t0, t1, n_samples)
    bps = models.breakpoints(spec, t0, t1)
    targets = np.union1d(samples, bps)
    if t1 < t0:
        targets = targets[::-1]
    is_sample = np.isin(targets, samples)

    psi_at, normdev, n_reached, status, istats, fstats, psi_left = _run_kernel(
        spec, psi0, targets, cfg
    )
    diag = Diagnostics(
        steps=int(istats[0]),
        rejections=int(istats[1]),
        clamp_hits=int(istats[2]),
        fevals=int(istats[3]),
        max_norm_drift=float(fstats[0]),
        log_rescale=float(fstats[1]),
    )
    keep = is_sample.copy()
    keep[n_reached:] = False
    traj = _assemble(spec, targets[keep], psi_at[keep], normdev[keep], fstats, diag)

    if status != _kernels.OK:
        reason = "step size underflow" if status == _kernels.UNDERFLOW else "step budget exceeded"
        raise IntegrationError(
            f"{reason} at t={targets[n_reached - 1]:.6g} after {diag.steps} steps", traj
        )

    if refine and fstats[4] != fstats[5]:
        t_min, f_min = refine_minimum(
            spec, cfg, fstats[4], psi_left, fstats[3], fstats[5]
        )
        if f_min < traj.f_min:
            traj.t_min, traj.f_min = t_min, f_min
    sampled = traj.fidelity
    k = int(np.argmin(sampled))
    if sampled[k] < traj.f_min:
        traj.t_min, traj.f_min = float(traj.t[k]), float(sampled[k])
    return traj


def _assemble(spec, t, psi, normdev, fstats, diag):
    R, _ = models.schedule_eval(spec.schedule, t)
    energies, vectors = models.eigensystem(spec, t)
    return Trajectory(
        spec=spec,
        t=t,
        R=np.asarray(R, dtype=float),
        psi=psi,
        energies=energies,
        vectors=vectors,
        norm_err=normdev,
        f_min=float(fstats[2]),
        t_min=float(fstats[3]),
        diagnostics=diag,
    )


def propagate_model(spec, cfg=None, n_samples=4096, refine=True):
    """Propagate over the spec's full run interval from the ground state."""
    t0, t1 = models.time_interval(spec)
    psi0 = models.ground_state(spec, t0)
    return propagate(spec, psi0, t0, t1, cfg, n_samples=n_samples, refine=refine)


@dataclass
class ConvergenceReport:
    discrepancy: float
    levels: list
    converged: bool


def convergence_check(spec, psi0, t0, t1, cfg=None, levels=2, threshold=1e-7):
    """Self-convergence test: rerun with tolerances tightened by 100 per level
    and compare final states.

    ``levels`` tolerance levels give ``levels - 1`` successive discrepancies;
    the first one is the headline number.
    """
    if levels < 2:
        raise ValueError("need at least two tolerance levels")
    cfg = cfg or IntegratorConfig()
    finals = []
    for k in range(levels):
        c = cfg.tightened(100.0**k)
        tr = propagate(spec, psi0, t0, t1, c, n_samples=2, refine=False)
        finals.append(tr.psi[-1])
    diffs = [float(np.linalg.norm(finals[k] - finals[k + 1])) for k in range(len(finals) - 1)]
    return ConvergenceReport(diffs[0], diffs, diffs[0] <= threshold)
