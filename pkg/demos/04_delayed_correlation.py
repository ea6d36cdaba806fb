"""Delayed correlation g2(tau).

Emission after a detected phonon oscillates at the normal-mode
splitting, period 2 pi/J.  The time over which g2(tau) < 1 is the
usable antibunching window, roughly pi/J.
"""
import math

import numpy as np

from phononblock.experiments import antibunching_window, oscillation_period
from phononblock.fock import make_basis
from phononblock.lindblad import SystemParams, build_liouvillian
from phononblock.observables import g2_tau
from phononblock.solver import steady_state

p = SystemParams(delta=0.288, coupling_j=20.0, kerr_u=0.00096, drive_f=0.01)
liou = build_liouvillian(p, make_basis(10, 10))
rho = steady_state(liou).rho
taus = np.arange(0.0, 1.0 + 1e-12, 0.005)
series = g2_tau(liou, rho, 1, taus)

for tau, g in zip(taus[::10], series.values[::10]):
    print(f"tau = {tau:5.2f}  g2 = {g:9.4f}")
print(f"period {oscillation_period(taus, series.values):.4f}  (2pi/J = {2 * math.pi / 20:.4f})")
print(f"window {antibunching_window(taus, series.values):.4f}  (pi/J = {math.pi / 20:.4f})")
