"""Physical quantities read off density matrices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import poisson

from .errors import VacuumDenominator
from .fock import DensityMatrix, annihilation
from .lindblad import Superoperator
from .solver import propagate

__all__ = [
    "CorrelationSeries",
    "PhononDistribution",
    "g2_zero",
    "g2_tau",
    "phonon_distribution",
    "mean_phonon",
    "poisson_reference",
    "IMAG_TOL",
    "VACUUM_TOL",
]

IMAG_TOL = 1e-9
VACUUM_TOL = 1e-14


def _real(value: complex, what: str, tol: float = IMAG_TOL) -> float:
    if abs(np.imag(value)) > tol:
        raise ValueError(f"{what} has imaginary part {np.imag(value):.3g}")
    return float(np.real(value))


def _populations(rho) -> np.ndarray:
    d = np.diag(np.asarray(rho))
    if np.max(np.abs(d.imag), initial=0.0) > IMAG_TOL:
        raise ValueError("density matrix has complex diagonal entries")
    return d.real


@dataclass(frozen=True)
class PhononDistribution:
    """Occupation probabilities P_m, m = 0..m_max, of one mode.

    ``missing_mass`` is the weight outside the listed support; it is
    zero for marginals of a truncated state and non-zero for a cut
    Poisson reference.
    """

    probabilities: np.ndarray
    mean: float
    missing_mass: float = 0.0

    def __len__(self):
        return len(self.probabilities)

    def __getitem__(self, m):
        return self.probabilities[m]


@dataclass(frozen=True)
class CorrelationSeries:
    taus: np.ndarray
    values: np.ndarray
    mean_occupation: float
    trace_deviation: np.ndarray = field(default=None, repr=False)


def mean_phonon(rho, mode: int = 1) -> float:
    n = rho.basis.occupations(mode)
    d = np.diag(rho.data)
    return _real(np.sum(n * d), "mean phonon number", 1e-10)


def g2_zero(rho: DensityMatrix, mode: int = 1) -> float:
    """<b^+ b^+ b b> / <b^+ b>^2 for the chosen mode."""
    n = rho.basis.occupations(mode)
    pops = _populations(rho.data)
    mean = float(np.sum(n * pops))
    if not mean > VACUUM_TOL:
        raise VacuumDenominator(
            f"mean occupation {mean:.3g} of mode {mode} is too small for g2"
        )
    return float(np.sum(n * (n - 1) * pops)) / mean**2


def phonon_distribution(rho: DensityMatrix, mode: int = 1) -> PhononDistribution:
    """Marginal P_m = sum_n rho_{mn,mn} (mode 1) or sum_m (mode 2)."""
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    d1, d2 = rho.basis.dims
    pops = _populations(rho.data).reshape(d1, d2)
    probs = pops.sum(axis=1) if mode == 1 else pops.sum(axis=0)
    mean = float(np.arange(len(probs)) @ probs)
    return PhononDistribution(probs, mean)


def poisson_reference(mean: float, m_max: int) -> PhononDistribution:
    """Coherent-state weights with the given mean, cut (not renormalized) at m_max."""
    if mean < 0:
        raise ValueError("mean must be non-negative")
    probs = poisson.pmf(np.arange(m_max + 1), mean) if mean > 0 else np.eye(1, m_max + 1)[0]
    return PhononDistribution(np.asarray(probs, dtype=float), float(mean), float(1.0 - probs.sum()))


def _balancing_scale(rho_ss: DensityMatrix) -> tuple[float, float]:
    basis = rho_ss.basis
    # keep every weight product above ~1e-280 so nothing over/underflows
    floor = 10.0 ** (-280.0 / (2 * (basis.n1_max + basis.n2_max)))
    out = []
    for mode in (1, 2):
        n = max(mean_phonon(rho_ss, mode), 0.0)
        out.append(float(np.clip(np.sqrt(n), floor, 1.0)))
    return out[0], out[1]


def g2_tau(
    liouvillian: Superoperator,
    rho_ss: DensityMatrix,
    mode: int = 1,
    taus=None,
    *,
    rtol: float = 1e-9,
    atol: float = 1e-11,
) -> CorrelationSeries:
    """Delayed correlation via the quantum regression theorem.

    g2(tau) = Tr[b^+b e^{L tau}(b rho_ss b^+)] / <b^+b>^2.  The seed is
    divided by <b^+b> before propagation and is never renormalized.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or len(taus) == 0:
        raise ValueError("taus must be a non-empty 1-d sequence")
    if taus[0] < 0 or np.any(np.diff(taus) < 0):
        raise ValueError("taus must be sorted and non-negative")
    mean = mean_phonon(rho_ss, mode)
    if not mean > VACUUM_TOL:
        raise VacuumDenominator(f"mean occupation {mean:.3g} is too small for g2")

    b = annihilation(rho_ss.basis, mode).data
    seed = b @ rho_ss.data @ b.conj().T / mean
    number = rho_ss.basis.occupations(mode)
    run = propagate(
        liouvillian,
        seed,
        None,
        None,
        times=taus,
        renormalize=False,
        rtol=rtol,
        atol=atol,
        excitation_scale=_balancing_scale(rho_ss),
    )
    values = np.array([np.sum(number * np.diag(s.data)) for s in run.states]) / mean
    if np.max(np.abs(values.imag)) > IMAG_TOL:
        raise ValueError(f"g2(tau) has imaginary residue {np.max(np.abs(values.imag)):.3g}")
    return CorrelationSeries(taus, values.real, mean, run.trace_deviation)
