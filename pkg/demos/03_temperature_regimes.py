"""How much heat does blockade survive?

Thermal phonons fill the two-phonon level directly.  Below T1 the
interference term dominates, above T2 the thermal term does and g2
approaches 2.  Scan T/T0 and label each point by regime.
"""
import numpy as np

from phononblock.analytics import boundary_temperatures, g2_analytic
from phononblock.fock import make_basis
from phononblock.lindblad import SystemParams, build_liouvillian, thermal_occupancy
from phononblock.observables import g2_zero
from phononblock.solver import steady_state

base = SystemParams(delta=0.2885, coupling_j=20.0, kerr_u=0.00096, drive_f=0.01)
bounds = boundary_temperatures(base)
print(f"T1 = {bounds.t1_over_t0:.4f} T0, T2 = {bounds.t2_over_t0:.4f} T0")

basis = make_basis(10, 10)
print(f"{'T/T0':>7} {'n_th':>10} {'g2 num':>10} {'g2 ana':>10}  regime")
for t in np.concatenate([[0.0], np.geomspace(0.01, 0.2, 9)]):
    p = base.with_(n_th=thermal_occupancy(t))
    g2 = g2_zero(steady_state(build_liouvillian(p, basis)).rho)
    print(f"{t:7.4f} {p.n_th:10.3e} {g2:10.3e} {g2_analytic(p):10.3e}  {bounds.regime(t)}")
