"""
Singular Berry connections and the fate of adiabaticity
=======================================================

Replacing ``f(R) = R`` by ``|R|**(1 - sigma)`` or ``ln|R|`` makes the Berry
connection blow up like ``1/|R|**sigma`` at ``R = 0``.  For ``sigma < 1`` the
singularity is integrable and the fidelity still converges, only more slowly.
For the logarithm (``sigma = 1``) it never converges.
"""

import numpy as np

from adiabatic_lab import berry, sweep
from adiabatic_lab.models import Log, ModelSpec, Power

# Read the singularity index off the connections themselves.
R = np.geomspace(1e-3, 1.0, 40)
for f in (Power(0.25), Power(0.5), Power(0.75), Log()):
    spec = ModelSpec(f=f)
    mag = np.abs(berry.connection_analytic(spec, R).alpha10)
    print(f"{f!r:24s} sigma_hat = {berry.singularity_index(R, mag).sigma:.4f}")

# Finite differences of the eigenvectors agree with the closed forms.
spec = ModelSpec(f=Power(0.5))
a, n = berry.connection_analytic(spec, 0.3), berry.connection_numeric(spec, 0.3)
print(f"alpha10 at R = 0.3: analytic {a.alpha10:.10f}, numeric {n.alpha10:.10f}")

# Removable singularities: 1 - F_min ~ eps^(2(1 - sigma)).
for sigma in (0.25, 0.5, 0.75):
    spec = ModelSpec(f=Power(sigma))
    fit = sweep.fit_power_law(sweep.run_sweep(spec))
    print(f"sigma = {sigma}: slope {fit.slope:.3f}, predicted {sweep.predicted_exponent(spec):.3f}")

# The logarithm: F_min sits on a plateau well below one however slow the drive.
records = sweep.run_sweep(ModelSpec(f=Log()))
for r in records:
    print(f"  eps = {r.epsilon:.2e}   F_min = {r.f_min:.5f}")
print("verdict:", sweep.breakdown_check(records))
