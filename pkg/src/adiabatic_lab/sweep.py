"""Sweeps over the adiabatic parameter and power-law analysis of the results."""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import integrate, models
from .errors import InsufficientDataError, IntegrationError

BREAKDOWN = "breakdown"
CONVERGING = "converging"
INCONCLUSIVE = "inconclusive"

CSV_HEADER = "epsilon,f_min,infidelity,clamp_hits,steps"


@dataclass
class SweepRecord:
    epsilon: float
    f_min: float
    infidelity: float
    clamp_hits: int = 0
    steps: int = 0
    error: str | None = None


@dataclass
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    n_points_used: int
    noise_floor_excluded: int
    outlier_excluded: bool = False

    def to_dict(self):
        return dict(self.__dict__)


def default_grid(spec):
    """10 points over [1e-3, 1e-1] for linear schedules, 8 over [3e-3, 1e-1]
    for nonlinear ones (their run time grows like ``eps**(-1/sigma_t)``)."""
    if isinstance(spec.schedule, models.NonlinearTime):
        return np.geomspace(1e-1, 3e-3, 8)
    return np.geomspace(1e-1, 1e-3, 10)


def rate_matched_grid(template, rate_hi=1e-1, rate_lo=1e-3, num=8):
    """Prefactor grid for a nonlinear schedule whose largest ``|dR/dt|`` over
    the run spans ``[rate_lo, rate_hi]`` geometrically.

    The run interval stretches as ``eps`` shrinks so the endpoint rate is
    ``sigma_t R1**((sigma_t-1)/sigma_t) eps**(1/sigma_t)``, which is far from
    small on the prefactor grid of :func:`default_grid` once ``sigma_t > 1``.
    Matching the rate puts every point in the small-rate regime where the
    power law applies.  Only defined for ``sigma_t > 1``, where that rate is
    finite.
    """
    s = template.schedule
    if not isinstance(s, models.NonlinearTime) or s.sigma_t <= 1.0:
        raise ValueError("rate matching needs a nonlinear schedule with sigma_t > 1")
    r1 = max(abs(template.r_range[0]), abs(template.r_range[1]))
    st = s.sigma_t
    rates = np.geomspace(rate_hi, rate_lo, num) * template.omega0
    return (rates / (st * r1 ** ((st - 1.0) / st))) ** st


def run_one(template, epsilon, cfg=None, n_samples=257):
    spec = template.with_epsilon(float(epsilon))
    try:
        tr = integrate.propagate_model(spec, cfg, n_samples=n_samples)
    except IntegrationError as exc:
        d = exc.trajectory.diagnostics if exc.trajectory is not None else None
        return SweepRecord(
            float(epsilon),
            math.nan,
            math.nan,
            d.clamp_hits if d else 0,
            d.steps if d else 0,
            str(exc),
        )
    f_min = min(max(tr.f_min, 0.0), 1.0)
    return SweepRecord(
        float(epsilon),
        f_min,
        1.0 - f_min,
        tr.diagnostics.clamp_hits,
        tr.diagnostics.steps,
    )


def run_sweep(template, eps_grid=None, cfg=None, jobs=1, n_samples=257):
    """Propagate ``template`` once per value of the sweep variable.

    Each run covers the template's fixed parameter window from the ground
    state.  Runs are independent; with ``jobs > 1`` they are dispatched to a
    thread pool (the compiled stepper releases the GIL).  Integration
    failures are recorded on the affected record rather than raised.
    """
    grid = default_grid(template) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    if np.any(grid <= 0):
        raise ValueError("epsilon grid must be positive")
    if len(np.unique(grid)) != len(grid):
        raise ValueError("epsilon grid must not repeat values")
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda e: run_one(template, e, cfg, n_samples), grid))
    else:
        records = [run_one(template, e, cfg, n_samples) for e in grid]
    return sorted(records, key=lambda r: r.epsilon)


def fit_power_law(records, noise_floor=1e-10, guard=True):
    """Least-squares line through ``(ln eps, ln infidelity)``.

    Points at or below ``noise_floor`` are dropped.  With ``guard`` the
    largest-``eps`` point is also dropped when its residual exceeds three times
    the RMS residual of the others (pre-asymptotic contamination).
    """
    usable = [r for r in records if np.isfinite(r.infidelity) and r.infidelity > noise_floor]
    excluded = sum(1 for r in records if np.isfinite(r.infidelity) and r.infidelity <= noise_floor)
    if len(usable) < 3:
        raise InsufficientDataError(f"only {len(usable)} points above the noise floor")
    usable.sort(key=lambda r: r.epsilon)
    x = np.log([r.epsilon for r in usable])
    y = np.log([r.infidelity for r in usable])

    slope, intercept = np.polyfit(x, y, 1)
    dropped = False
    if guard and len(usable) >= 4:
        resid = y - (slope * x + intercept)
        rms_rest = math.sqrt(np.mean(resid[:-1] ** 2))
        if abs(resid[-1]) > 3 * rms_rest and rms_rest > 0:
            x, y = x[:-1], y[:-1]
            slope, intercept = np.polyfit(x, y, 1)
            dropped = True
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), len(x), excluded, dropped)


def predicted_exponent(spec):
    """Expected slope of ``ln(1 - F_min)`` against ``ln eps``.

    ===========================================  ==================
    linear schedule, ``f = |R|**(1 - sigma)``     ``2 (1 - sigma)``
    linear schedule, ``f = R``                    ``2``
    linear schedule, ``f = ln|R|``                ``None`` (breakdown)
    nonlinear schedule, ``sigma_t > 1``           ``2 / sigma_t``
    nonlinear schedule, ``sigma_t <= 1``          ``2``
    counterexample                                ``None``
    ===========================================  ==================
    """
    if spec.variant == models.COUNTER_EXAMPLE:
        return None
    s = spec.schedule
    if isinstance(s, models.NonlinearTime):
        if not isinstance(spec.f, models.Linear):
            return None
        return 2.0 / s.sigma_t if s.sigma_t > 1.0 else 2.0
    if isinstance(spec.f, models.Power):
        return 2.0 * (1.0 - spec.f.sigma)
    if isinstance(spec.f, models.Log):
        return None
    return 2.0


def breakdown_check(records, threshold=0.9, plateau_tol=0.05, min_records=3):
    """Classify a sweep as ``"breakdown"``, ``"converging"`` or ``"inconclusive"``.

    Breakdown means ``F_min`` has stopped moving (relative spread below
    ``plateau_tol`` over the last decade of ``eps``) at a value below
    ``threshold``.
    """
    recs = sorted((r for r in records if np.isfinite(r.f_min)), key=lambda r: r.epsilon)
    if len(recs) < min_records:
        return INCONCLUSIVE
    eps = np.array([r.epsilon for r in recs])
    if eps[-1] / eps[0] < 10.0 * (1 - 1e-9):
        return INCONCLUSIVE
    fmin = np.array([r.f_min for r in recs])
    last_decade = eps <= eps[0] * 10.0 * (1 + 1e-9)
    window = fmin[last_decade]
    if len(window) < 2:
        window = fmin[:2]
    spread = (window.max() - window.min()) / max(window.max(), 1e-300)
    if spread < plateau_tol and window.max() < threshold:
        return BREAKDOWN
    return CONVERGING


def to_csv(records):
    """Sweep CSV text; floats use the shortest round-trip representation."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        buf.write(f"{r.epsilon!r},{r.f_min!r},{r.infidelity!r},{r.clamp_hits},{r.steps}\n")
    return buf.getvalue()


def read_csv(text):
    lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
    if lines[0] != CSV_HEADER:
        raise ValueError("not a sweep CSV")
    out = []
    for ln in lines[1:]:
        e, f, i, c, s = ln.split(",")
        out.append(SweepRecord(float(e), float(f), float(i), int(c), int(s)))
    return out
