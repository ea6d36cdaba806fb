"""Where does perfect blockade sit?

Two coupled resonators, only the first is driven and has a Kerr term.
Two-phonon occupation of mode 1 vanishes at T = 0 when the two
excitation paths interfere destructively.  Solve for that point,
compare with the large-J closed form, then check it with the full
master equation.
"""
import numpy as np

from phononblock.analytics import g2_analytic, optimal_approx, optimal_exact
from phononblock.fock import make_basis
from phononblock.lindblad import SystemParams, build_liouvillian
from phononblock.observables import g2_zero
from phononblock.solver import steady_state

# exact roots against the closed form, in units of gamma
print(f"{'J':>6} {'delta':>10} {'U':>12} {'U approx':>12}")
for j in (5.0, 10.0, 20.0, 50.0):
    ex, ap = optimal_exact(j), optimal_approx(j)
    print(f"{j:6.1f} {ex.delta_opt:10.5f} {ex.u_opt:12.4e} {ap.u_opt:12.4e}")

# at the exact root the leading-order g2 is zero; the master equation
# keeps the next order, so the numerical value is small but finite
pt = optimal_exact(10.0)
basis = make_basis(10, 10)
for u_factor in (0.5, 1.0, 2.0):
    p = SystemParams(pt.delta_opt, 10.0, u_factor * pt.u_opt, 0.001)
    report = steady_state(build_liouvillian(p, basis))
    print(f"U = {u_factor:.1f} x U_opt: g2 numerical {g2_zero(report.rho):.3e}, "
          f"analytic {g2_analytic(p):.3e}, residual {report.residual:.1e}")

# the valley is narrow: a few percent off in delta costs orders of magnitude
for d in np.array([0.98, 1.0, 1.02]) * pt.delta_opt:
    p = SystemParams(d, 10.0, pt.u_opt, 0.001)
    print(f"delta = {d:.4f}: g2 = {g2_zero(steady_state(build_liouvillian(p, basis)).rho):.3e}")
