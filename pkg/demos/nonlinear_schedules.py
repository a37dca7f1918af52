"""
Nonlinear sweeps of the parameter
=================================

With ``R = eps sign(t) |t|**sigma_t`` the run is stretched so that ``R``
always covers the same window.  For ``sigma_t > 1`` the drive is fastest at
the ends and ``1 - F_min ~ eps**(2/sigma_t)``.  For ``sigma_t < 1`` it is
fastest, in fact unbounded, at ``t = 0``.  That point acts as a removable
singularity and the exponent goes back to 2.
"""

import time

import numpy as np

from adiabatic_lab import adiabatic, sweep
from adiabatic_lab.models import ModelSpec, NonlinearTime

for sigma_t in (2.0, 3.0):
    spec = ModelSpec(schedule=NonlinearTime(0.1, sigma_t))
    # On the default prefactor grid the endpoint rate is of order one, far from
    # the slow regime, so sample a grid whose largest |dR/dt| spans 1e-1..1e-3.
    grid = sweep.rate_matched_grid(spec)
    rates = [adiabatic.adiabatic_parameter(spec.with_epsilon(e)) for e in grid]
    fit = sweep.fit_power_law(sweep.run_sweep(spec, grid))
    print(f"sigma_t = {sigma_t}: eps from {grid[-1]:.2e} to {grid[0]:.2e} "
          f"(max rate {min(rates):.0e}..{max(rates):.0e}), slope {fit.slope:.3f}, "
          f"predicted {sweep.predicted_exponent(spec):.3f}")

# sigma_t < 1: the run interval grows like eps**-2, so stop at eps = 0.01.
spec = ModelSpec(schedule=NonlinearTime(0.1, 0.5))
tic = time.perf_counter()
records = sweep.run_sweep(spec, np.geomspace(1e-1, 1e-2, 5))
fit = sweep.fit_power_law(records)
print(f"sigma_t = 0.5: slope {fit.slope:.3f}, predicted {sweep.predicted_exponent(spec)} "
      f"({sum(r.steps for r in records)} steps in {time.perf_counter() - tic:.1f}s)")
