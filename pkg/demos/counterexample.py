"""
A driven system that never becomes adiabatic
============================================

The counterexample Hamiltonian is the spin model seen from the frame that
rotates with the field, with the overall sign reversed.  Its spectrum is fixed
and its drive rate is ``omega``.  Even so, as ``omega -> 0`` its ground state
does not follow.  Flipping the overall sign turns the same system into one
that converges.
"""

import math

import numpy as np

from adiabatic_lab import adiabatic, berry, integrate, models, sweep
from adiabatic_lab.models import LinearTime, ModelSpec

grid = [0.1, 0.03, 0.01]
for flip in (False, True):
    spec = ModelSpec(variant="CounterExample", sign_flip=flip)
    records = sweep.run_sweep(spec, grid)
    f_mins = ", ".join(f"{r.f_min:.6f}" for r in records)
    print(f"sign_flip={flip!s:5}  F_min = [{f_mins}]  ->  {sweep.breakdown_check(records)}")

# The field direction L(t) precesses about a fixed axis at rate varpi.
spec = ModelSpec(variant="CounterExample", schedule=LinearTime(0.05))
u, varpi = models.precession_axis(spec)
print(f"precession axis {np.round(u, 4)}, rate {varpi:.4f}")

# The off-diagonal connection has constant modulus, so there is no singularity
# to blame.  What matters is its phase.  In the unflipped model arg(alpha10)
# turns at -varpi and cancels the dynamical phase that should average the
# transitions out.  The drive is resonant and first-order theory saturates.
# With the sign flipped the two rates add instead.
t = np.linspace(-2 * math.pi, 2 * math.pi, 40001) / 0.05
for flip in (False, True):
    s = spec.replace(sign_flip=flip)
    a10 = berry.connection_analytic(s, t).alpha10
    rate = np.mean(np.diff(np.unwrap(np.angle(a10))) / np.diff(t))
    first = np.max(np.abs(adiabatic.first_order_profile(s, t[::10])) ** 2)
    print(f"sign_flip={flip!s:5}  |alpha10| = {abs(a10[0]):.5f}, d arg(alpha10)/dt = {rate:+.4f}, "
          f"first-order max |dC1|^2 = {first:.3g}")

traj = integrate.propagate_model(spec, n_samples=1025)
print(f"eps = 0.05: F_min = {traj.f_min:.6f} at t = {traj.t_min:.2f}")
