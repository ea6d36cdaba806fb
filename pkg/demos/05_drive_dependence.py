"""Drive strength at zero and finite temperature.

At T = 0 the weak-drive g2 does not depend on F.  With heat, a stronger
drive first helps (coherent one-phonon occupation outgrows the thermal
background) and then hurts (two-phonon saturation), so g2 dips.
"""
import numpy as np

from phononblock.fock import make_basis
from phononblock.lindblad import SystemParams, build_liouvillian, thermal_occupancy
from phononblock.observables import g2_zero
from phononblock.solver import steady_state

basis = make_basis(10, 10)
drives = np.geomspace(1e-4, 6, 24)
for t in (0.0, 0.03, 0.05):
    base = SystemParams(0.288, 20.0, 0.00096, 1.0, n_th=thermal_occupancy(t))
    g2 = [g2_zero(steady_state(build_liouvillian(base.with_(drive_f=f), basis)).rho)
          for f in drives]
    k = int(np.argmin(g2))
    print(f"T = {t:.2f} T0: " + " ".join(f"{g:.1e}" for g in g2[::3]))
    print(f"    minimum {g2[k]:.2e} at F = {drives[k]:.2e}")
