"""From dimensionless parameters to a silicon nanobeam.

Frequency, Kerr strength and characteristic temperature of a doubly
clamped beam, the thermal occupation at a dilution-fridge temperature,
and the antibunching window in seconds.
"""
from phononblock.analytics import physical_estimate

est = physical_estimate(width_d=5e-9, length_l=100e-9, gamma=10e6)
print(f"f0     = {est.frequency / 1e9:.3f} GHz")
print(f"U      = {est.u_physical:.1f} Hz")
print(f"T0     = {est.t0 * 1e3:.1f} mK")
print(f"n_th   = {est.n_th_at(5.3e-3):.2e} at 5.3 mK")
for name, q in est.quality_factors().items():
    print(f"Q ({name}) = {q:.0f}")
print(f"window = {est.window_seconds(200e6) * 1e9:.1f} ns for J = 200 MHz")
