"""Berry connections of the driven two-level models.

Connections are taken with respect to the slow parameter: ``R`` for
``SpinRotating`` and time ``t`` for ``CounterExample`` (whose Hamiltonian is
not a function of ``R`` alone).  Index 0 is the instantaneous ground state,
index 1 the excited state, and ``alpha_nm = <E_n| i d/dR |E_m>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _integrate
from scipy import stats

from . import linalg, models
from .errors import InsufficientDataError, SingularPointError, StepTooLargeError


@dataclass
class ConnectionSample:
    R: float
    alpha00: float
    alpha11: float
    alpha10: complex
    beta0: float = 0.0
    #: numeric evaluations fill this independently; analytic ones mirror alpha10
    alpha01: complex | None = None

    def __post_init__(self):
        if self.alpha01 is None:
            self.alpha01 = np.conj(self.alpha10)


def _check_clamp(spec, R):
    if spec.variant == models.SPIN_ROTATING and np.any(models.is_clamped(spec, R)):
        raise SingularPointError(f"connection requested inside the |R| < {spec.clamp} clamp")


def connection_analytic(spec, R):
    """Closed-form connections in the analytic eigenvector gauge.

    For the rotating spin::

        alpha00 = cos(theta)/2 * df/dR,  alpha10 = sin(theta)/2 * df/dR

    For the counterexample the vector connections on the ``L`` sphere are
    projected on ``dL/dt``.  The eigenenergies are constant in both families,
    so ``beta0 = 0``.
    """
    R = np.asarray(R, dtype=float)
    _check_clamp(spec, R)
    zero = np.zeros_like(R)
    if spec.variant == models.SPIN_ROTATING:
        _, df = models.f_eval(spec.f, R, spec.clamp)
        a00 = 0.5 * math.cos(spec.theta) * np.asarray(df)
        a10 = 0.5 * math.sin(spec.theta) * np.asarray(df) + 0j
        return ConnectionSample(_o(R), _o(a00), _o(-a00), _o(a10), _o(zero))

    L, _ = models.l_vector(spec, R)
    Ld = models.l_dot(spec, R)
    L1, L2, L3 = L[..., 0], L[..., 1], L[..., 2]
    s2 = 1.0 - L3 * L3
    s = np.sqrt(s2)
    # against-L state (ground unless sign-flipped)
    a_minus = (L2 * L3 * Ld[..., 0] - L1 * L3 * Ld[..., 1]) / (2 * s2)
    # <along| i d |against>
    a_along_against = (-L2 * Ld[..., 0] + L1 * Ld[..., 1] - 1j * Ld[..., 2]) / (2 * s)
    if spec.sign_flip:
        a00, a10 = -a_minus, np.conj(a_along_against)
    else:
        a00, a10 = a_minus, a_along_against
    return ConnectionSample(_o(R), _o(a00), _o(-a00), _o(a10), _o(zero))


def _o(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


def _vectors(spec, R, gauge):
    if gauge == "analytic":
        return models.eigenvectors_at_parameter(spec, R)
    _, v = linalg.eig2(models.hamiltonian_at_parameter(spec, R))
    return v


def _align(v, ref):
    ov = np.einsum("...ni,...ni->...n", ref.conj(), v)
    if np.any(np.abs(ov) < 0.9):
        raise StepTooLargeError("neighbouring eigenvectors overlap < 0.9; reduce delta")
    return v * (np.abs(ov) / ov)[..., None]


def _derivative(spec, R, delta, gauge, centre):
    vp = _vectors(spec, R + delta, gauge)
    vm = _vectors(spec, R - delta, gauge)
    if gauge == "parallel":
        vp, vm = _align(vp, centre), _align(vm, centre)
    return (vp - vm) / (2 * delta)


def connection_numeric(spec, R, delta=None, gauge="analytic", tol=1e-4):
    """Finite-difference connections ``<E_n(R)| i (E_m(R+d) - E_m(R-d)) / 2d``.

    ``gauge="analytic"`` differentiates the smooth analytic eigenvectors so the
    diagonal entries are comparable with :func:`connection_analytic`;
    ``gauge="parallel"`` differentiates :func:`linalg.eig2` vectors phase
    aligned to the centre point, where only ``|alpha10|`` is meaningful.

    One Richardson step (``d`` and ``d/2``) is taken; if the two estimates
    differ by more than ``tol`` (relative) :class:`StepTooLargeError` is
    raised.
    """
    R = float(R)
    if delta is None:
        delta = 1e-6 * max(1.0, abs(R))
    if spec.variant == models.SPIN_ROTATING and not isinstance(spec.f, models.Linear):
        if abs(R) - delta < spec.clamp:
            raise SingularPointError("finite-difference stencil reaches the singular point")
    centre = _vectors(spec, R, gauge)
    d1 = _derivative(spec, R, delta, gauge, centre)
    d2 = _derivative(spec, R, delta / 2, gauge, centre)
    deriv = d2 + (d2 - d1) / 3.0
    scale = max(np.max(np.abs(d2)), 1e-300)
    if np.max(np.abs(d2 - d1)) > tol * scale and np.max(np.abs(d2 - d1)) > 1e-9:
        raise StepTooLargeError("Richardson estimates disagree; reduce delta")
    alpha = 1j * np.einsum("ni,mi->nm", centre.conj(), deriv)

    H = models.hamiltonian_at_parameter
    ep, _ = linalg.eig2(H(spec, R + delta))
    em, _ = linalg.eig2(H(spec, R - delta))
    beta0 = (ep[0] - em[0]) / (2 * delta)
    return ConnectionSample(
        R,
        float(alpha[0, 0].real),
        float(alpha[1, 1].real),
        complex(alpha[1, 0]),
        float(beta0),
        complex(alpha[0, 1]),
    )


def scan(spec, grid, numeric=False):
    """Connection samples over a grid; rows at singular points are NaN."""
    rows = []
    for R in np.asarray(grid, dtype=float):
        try:
            if numeric:
                s = connection_numeric(spec, R)
            else:
                s = connection_analytic(spec, R)
            rows.append((R, float(s.alpha00), complex(s.alpha10), float(s.beta0)))
        except (SingularPointError, StepTooLargeError, ArithmeticError):
            rows.append((R, math.nan, complex(math.nan, math.nan), math.nan))
    return rows


@dataclass
class SingularityFit:
    sigma: float
    stderr: float
    rms_residual: float
    n_points: int


def singularity_index(R, magnitude):
    """Estimate ``sigma`` in ``|alpha10| ~ |R|**(-sigma)`` by a log-log fit."""
    R = np.abs(np.asarray(R, dtype=float))
    m = np.asarray(magnitude, dtype=float)
    if R.size < 6:
        raise InsufficientDataError("need at least 6 samples")
    if np.any(~np.isfinite(m)) or np.any(m <= 0) or np.any(R <= 0):
        raise ValueError("magnitudes and |R| must be positive and finite")
    x, y = np.log(R), np.log(m)
    fit = stats.linregress(x, y)
    resid = y - (fit.intercept + fit.slope * x)
    return SingularityFit(-fit.slope, fit.stderr, float(np.sqrt(np.mean(resid**2))), R.size)


def secular_bound(gap, g, epsilon, im_rc):
    """Exponentially small secular-term estimate.

    Returns ``exp(-|integral_0^{i im_rc} gap(z)/g(z) dz| / epsilon)`` with the
    integral taken along the imaginary axis.  ``gap`` and ``g`` are callables
    of a complex argument or constants.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if not im_rc > 0:
        raise ValueError("im_rc must be positive")
    gap_f = gap if callable(gap) else (lambda z, c=gap: c)
    g_f = g if callable(g) else (lambda z, c=g: c)

    def integrand(y):
        z = 1j * y
        return 1j * complex(gap_f(z)) / complex(g_f(z))

    re, err_re = _integrate.quad(lambda y: integrand(y).real, 0.0, im_rc, limit=200)
    im, err_im = _integrate.quad(lambda y: integrand(y).imag, 0.0, im_rc, limit=200)
    if not (math.isfinite(re) and math.isfinite(im)):
        raise ArithmeticError("secular exponent integral did not converge")
    return math.exp(-abs(complex(re, im)) / epsilon)
