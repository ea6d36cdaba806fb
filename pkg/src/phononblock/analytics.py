"""Closed-form weak-drive results used as an independent check on the numerics.

All matrix elements refer to the six-state space {|00>,|01>,|02>,|10>,|11>,|20>}
numbered 1..6: ``rho44`` is the |1,0> population and ``rho66`` the |2,0>
population of the full state.  Rates are in units of ``params.gamma``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import constants
from scipy.optimize import bisect

from .errors import DegenerateDenominator, NoRoot, UndrivenSystem, VacuumDenominator
from .lindblad import SystemParams, thermal_occupancy

__all__ = [
    "OptimalPoint",
    "RegimeBoundaries",
    "PhysicalEstimate",
    "rho66_zero_t",
    "rho44_finite_t",
    "rho66_finite_t",
    "g2_analytic",
    "g2_analytic_zero_t",
    "optimal_exact",
    "optimal_approx",
    "optimality_residuals",
    "boundary_temperatures",
    "physical_estimate",
    "SILICON_YOUNGS_MODULUS",
    "SILICON_DENSITY",
]

_DEGENERATE = 1e-14

# Polycrystalline silicon, the usual MEMS design value (single-crystal
# values run from 130 GPa along <100> to 188 GPa along <111>).
SILICON_YOUNGS_MODULUS = 160e9  # Pa
SILICON_DENSITY = 2330.0  # kg / m^3


def _interference_numerator(p: SystemParams) -> complex:
    dt = p.delta_tilde
    return p.kerr_u * (p.coupling_j**2 + 2 * dt**2) + 2 * dt**3


def rho66_zero_t(params: SystemParams) -> float:
    """Two-phonon population of mode 1 at zero temperature."""
    dt = params.delta_tilde
    denom = abs(params.kerr_u + 2 * dt)
    if denom <= _DEGENERATE:
        raise DegenerateDenominator("|U + 2 Delta~| vanishes")
    j = params.coupling_j
    if j <= 0:
        raise DegenerateDenominator("coupling J must be positive")
    f = params.drive_f
    return f**4 * abs(_interference_numerator(params)) ** 2 / (2 * j**8 * denom**2)


def rho44_finite_t(params: SystemParams) -> float:
    """One-phonon population of mode 1: coherent part plus n_th."""
    dt = params.delta_tilde
    denom = abs(params.coupling_j**2 - dt**2)
    if denom <= _DEGENERATE:
        raise DegenerateDenominator("|J^2 - Delta~^2| vanishes")
    return params.drive_f**2 * abs(dt) ** 2 / denom**2 + params.n_th


def rho66_finite_t(params: SystemParams) -> float:
    dt = params.delta_tilde
    j = params.coupling_j
    cross = 2 * params.drive_f**2 * abs(dt) ** 2 * params.n_th / j**4
    return rho66_zero_t(params) + cross + params.n_th**2


def g2_analytic(params: SystemParams) -> float:
    """2 rho66 / rho44^2 with the finite-temperature elements."""
    r44 = rho44_finite_t(params)
    if r44 == 0:
        raise VacuumDenominator("rho44 = 0: undriven system at zero temperature")
    return 2 * rho66_finite_t(params) / r44**2


def g2_analytic_zero_t(params: SystemParams) -> float:
    """Zero-temperature closed form, written without F (it cancels)."""
    dt = params.delta_tilde
    j = params.coupling_j
    denom = (params.kerr_u + 2 * dt) * abs(dt) ** 2 * j**4
    if abs(denom) <= _DEGENERATE:
        raise DegenerateDenominator("zero-temperature g2 denominator vanishes")
    return abs(_interference_numerator(params) * abs(j**2 - dt**2) ** 2 / denom) ** 2


@dataclass(frozen=True)
class OptimalPoint:
    delta_opt: float
    u_opt: float
    exact: bool


def optimality_residuals(delta: float, u: float, j: float, gamma: float = 1.0):
    """Left-hand sides of the two perfect-antibunching conditions."""
    first = 2 * u * j**2 + 4 * (delta + u) * delta**2 - (3 * delta + u) * gamma**2
    second = 8 * u * delta + 12 * delta**2 - gamma**2
    return first, second


def _delta_of_u(u: float, gamma: float, branch: int = 1) -> float:
    return (-8 * u + branch * math.sqrt(64 * u**2 + 48 * gamma**2)) / 24


def optimal_approx(j: float, gamma: float = 1.0) -> OptimalPoint:
    """Large-J optimum: Delta = gamma/(2 sqrt 3), U = 2 gamma^3/(3 sqrt3 J^2)."""
    if j <= 0 or gamma <= 0:
        raise ValueError("j and gamma must be positive")
    if j < 5 * gamma:
        warnings.warn("strong-coupling optimum used with J < 5 gamma", stacklevel=2)
    return OptimalPoint(
        gamma / (2 * math.sqrt(3)), 2 * gamma**3 / (3 * math.sqrt(3) * j**2), exact=False
    )


def optimal_exact(j: float, gamma: float = 1.0, *, branch: int = 1) -> OptimalPoint:
    """Simultaneous root of both optimality conditions.

    The second condition is solved for Delta(U) (``branch=+1`` picks the
    positive root); the first is then bisected in U on a bracket of one
    decade either side of the strong-coupling estimate.
    """
    if j <= 0 or gamma <= 0:
        raise ValueError("j and gamma must be positive")
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        guess = optimal_approx(j, gamma).u_opt

    def f(u):
        return optimality_residuals(_delta_of_u(u, gamma, branch), u, j, gamma)[0]

    lo, hi = guess / 10, guess * 10
    if np.sign(f(lo)) == np.sign(f(hi)):
        raise NoRoot(f"no sign change of the optimality condition in [{lo:.3g}, {hi:.3g}]")
    u = bisect(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=4000)
    return OptimalPoint(_delta_of_u(u, gamma, branch), u, exact=True)


@dataclass(frozen=True)
class RegimeBoundaries:
    """Quantum / crossover / thermal boundaries in units of T0."""

    t1_over_t0: float
    t2_over_t0: float

    def regime(self, t_over_t0: float) -> str:
        if t_over_t0 < self.t1_over_t0:
            return "quantum"
        if t_over_t0 < self.t2_over_t0:
            return "crossover"
        return "thermal"


def boundary_temperatures(params: SystemParams) -> RegimeBoundaries:
    f, j = params.drive_f, params.coupling_j
    if f <= 0:
        raise UndrivenSystem("regime boundaries need a non-zero drive")
    if j <= 0:
        raise ValueError("coupling J must be positive")
    dt = params.delta_tilde
    u = params.kerr_u
    num = _interference_numerator(params)
    if abs(num) <= _DEGENERATE:
        # perfect interference: the quantum term vanishes, no lower boundary
        t1 = 0.0
    else:
        ratio1 = 4 * j**4 * abs(u * dt + 2 * dt**2) ** 2 / (f**2 * abs(num) ** 2)
        t1 = 1.0 / math.log1p(ratio1)
    ratio2 = j**4 / (2 * abs(f * dt) ** 2)
    t2 = 1.0 / math.log1p(ratio2)
    return RegimeBoundaries(t1, t2)


@dataclass(frozen=True)
class PhysicalEstimate:
    """SI-unit estimates for a doubly clamped beam.

    ``omega0`` in rad/s, ``frequency`` = omega0/2pi in Hz, ``u_physical``
    in s^-1 (quoted as Hz), ``t0`` in K.
    """

    omega0: float
    u_physical: float
    t0: float
    gamma: float | None = None

    @property
    def frequency(self) -> float:
        return self.omega0 / (2 * math.pi)

    def n_th_at(self, temperature_k: float) -> float:
        return thermal_occupancy(temperature_k / self.t0)

    def quality_factors(self) -> dict[str, float]:
        """Q under both readings of a decay rate quoted in MHz."""
        if not self.gamma:
            raise ValueError("no decay rate given")
        return {
            "omega0_over_gamma": self.omega0 / self.gamma,
            "f0_over_gamma": self.frequency / self.gamma,
        }

    def window_seconds(self, j_rate: float) -> float:
        """Antibunching window pi/J for a coupling rate J in s^-1."""
        return math.pi / j_rate


def physical_estimate(
    width_d: float,
    length_l: float,
    youngs_e: float = SILICON_YOUNGS_MODULUS,
    density_rho: float = SILICON_DENSITY,
    gamma: float | None = None,
) -> PhysicalEstimate:
    """Fundamental frequency, Kerr strength and T0 from beam geometry (SI units).

    omega0/2pi = d/L^2 sqrt(E/rho), U = hbar/(1.6 rho d^4 L), T0 = hbar omega0/k_B.
    """
    for name, v in (("width_d", width_d), ("length_l", length_l),
                    ("youngs_e", youngs_e), ("density_rho", density_rho)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    omega0 = 2 * math.pi * width_d / length_l**2 * math.sqrt(youngs_e / density_rho)
    u = constants.hbar / (1.6 * density_rho * width_d**4 * length_l)
    t0 = constants.hbar * omega0 / constants.k
    return PhysicalEstimate(omega0, u, t0, gamma)

