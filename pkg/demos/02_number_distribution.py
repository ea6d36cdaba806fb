"""Phonon-number statistics at the blockade point.

A sub-Poissonian distribution is the static fingerprint of blockade: the
two-phonon population falls far below a coherent state with the same
mean.
"""
from phononblock.fock import make_basis
from phononblock.lindblad import SystemParams, build_liouvillian
from phononblock.observables import g2_zero, phonon_distribution, poisson_reference
from phononblock.solver import steady_state

p = SystemParams(delta=0.2874, coupling_j=10.0, kerr_u=0.00387, drive_f=0.00005)
report = steady_state(build_liouvillian(p, make_basis(10, 10)))
dist = phonon_distribution(report.rho, mode=1)
ref = poisson_reference(dist.mean, 3)

print(f"solver: {report.method}, residual {report.residual:.1e}")
print(f"<n1> = {dist.mean:.3e}, g2(0) = {g2_zero(report.rho):.3e}")
print(f"{'m':>2} {'P(m)':>12} {'Poisson':>12}")
for m in range(4):
    print(f"{m:2d} {dist[m]:12.3e} {ref[m]:12.3e}")
