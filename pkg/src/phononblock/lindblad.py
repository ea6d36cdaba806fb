"""Rotating-frame Hamiltonian and finite-temperature Liouvillian.

Frequencies are in units of the common decay rate; the bundled
experiments all use ``gamma = 1``.  Density matrices are vectorized by
column stacking, so that ``vec(A @ rho @ B) = kron(B.T, A) @ vec(rho)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from numbers import Real

import numpy as np
import scipy.sparse as sp

from .errors import TruncationWarning
from .fock import FockBasis, Operator, annihilation, make_basis

__all__ = [
    "SystemParams",
    "Temperature",
    "Superoperator",
    "build_hamiltonian",
    "thermal_occupancy",
    "build_liouvillian",
    "vec",
    "unvec",
]


def vec(rho) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim: int) -> np.ndarray:
    return np.asarray(v).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class SystemParams:
    """Model parameters, all rates in units of ``gamma``.

    ``delta`` is the drive detuning, ``coupling_j`` the beam-beam coupling,
    ``kerr_u`` the Kerr coefficient of mode 2 and ``drive_f`` the force
    amplitude on mode 1.  Both modes see the same bath.
    """

    delta: float
    coupling_j: float
    kerr_u: float
    drive_f: float
    gamma: float = 1.0
    n_th: float = 0.0

    def __post_init__(self):
        for name in ("delta", "coupling_j", "kerr_u", "drive_f", "gamma", "n_th"):
            value = getattr(self, name)
            if not isinstance(value, Real) or isinstance(value, bool):
                raise TypeError(
                    f"{name} must be a real scalar (one value shared by both modes), "
                    f"got {value!r}"
                )
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, float(value))
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.n_th < 0:
            raise ValueError("n_th must be non-negative")
        if self.drive_f < 0:
            raise ValueError("drive_f must be non-negative")
        if self.coupling_j < 0:
            raise ValueError("coupling_j must be non-negative")

    @property
    def delta_tilde(self) -> complex:
        """Complex detuning Delta - i*gamma/2 used by the closed forms."""
        return complex(self.delta, -0.5 * self.gamma)

    def with_(self, **changes) -> SystemParams:
        return replace(self, **changes)

    def with_temperature(self, temp) -> SystemParams:
        return replace(self, n_th=thermal_occupancy(temp))


@dataclass(frozen=True)
class Temperature:
    """Temperature in units of T0 = hbar*omega0/k_B."""

    t_over_t0: float

    def __post_init__(self):
        if not self.t_over_t0 >= 0:
            raise ValueError("temperature must be non-negative")


def thermal_occupancy(temp) -> float:
    """Bose-Einstein occupancy 1/(exp(T0/T) - 1); exactly 0 at T = 0."""
    t = temp.t_over_t0 if isinstance(temp, Temperature) else float(temp)
    if not t >= 0:
        raise ValueError("temperature must be non-negative")
    if t == 0:
        return 0.0
    x = 1.0 / t
    if x > 700:
        # expm1 overflows; 1/(e^x - 1) == e^-x to double precision here
        return math.exp(-x)
    return 1.0 / math.expm1(x)


def build_hamiltonian(params: SystemParams, basis: FockBasis | None = None) -> Operator:
    """H = D(n1 + n2) + J(b1^+ b2 + b2^+ b1) + F(b1^+ + b1) + U b2^+2 b2^2."""
    basis = basis or make_basis()
    b1 = annihilation(basis, 1).data
    b2 = annihilation(basis, 2).data
    n1 = basis.occupations(1)
    n2 = basis.occupations(2)
    h = np.diag(params.delta * (n1 + n2) + params.kerr_u * n2 * (n2 - 1))
    hop = b1.T @ b2
    h = h + params.coupling_j * (hop + hop.T) + params.drive_f * (b1 + b1.T)
    return Operator(basis, h)


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Liouvillian acting on column-stacked density matrices.

    The matrix is stored sparse.  The generating pieces are kept so that
    solvers can act with ``L`` in operator form,
    ``L(rho) = A rho + rho A^+ + sum_k c_k rho c_k^+`` with
    ``A = -iH - 1/2 sum_k c_k^+ c_k``.
    """

    basis: FockBasis
    matrix: sp.csr_matrix = field(repr=False)
    hamiltonian: np.ndarray | None = field(default=None, repr=False)
    jumps: tuple = field(default=(), repr=False)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    @property
    def has_generator(self) -> bool:
        return self.hamiltonian is not None

    def effective_generator(self) -> np.ndarray:
        """Non-Hermitian A = -iH - 1/2 sum c^+ c."""
        a = -1j * self.hamiltonian
        for c in self.jumps:
            a = a - 0.5 * (c.conj().T @ c)
        return a

    def apply(self, rho) -> np.ndarray:
        """L(rho) as a matrix."""
        rho = np.asarray(rho)
        if self.has_generator:
            a = self.effective_generator()
            out = a @ rho + rho @ a.conj().T
            for c in self.jumps:
                out = out + c @ rho @ c.conj().T
            return out
        return unvec(self.matrix @ vec(rho), self.dim)

    def __matmul__(self, v):
        return self.matrix @ v

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        scaled = (scalar * self.matrix).tocsr()
        if self.has_generator and np.isreal(scalar) and scalar > 0:
            root = math.sqrt(float(np.real(scalar)))
            return Superoperator(
                self.basis,
                scaled,
                float(np.real(scalar)) * self.hamiltonian,
                tuple(root * c for c in self.jumps),
            )
        return Superoperator(self.basis, scaled)

    __rmul__ = __mul__


def _dissipator(a: sp.spmatrix, eye: sp.spmatrix) -> sp.spmatrix:
    """Matrix of D[a]rho = 2 a rho a^+ - a^+a rho - rho a^+a."""
    ada = (a.conj().T @ a).tocsr()
    return 2 * sp.kron(a.conj(), a) - sp.kron(eye, ada) - sp.kron(ada.T, eye)


def build_liouvillian(params: SystemParams, basis: FockBasis | None = None) -> Superoperator:
    basis = basis or make_basis()
    limit = min(basis.n1_max, basis.n2_max) / 10
    if params.n_th > limit:
        warnings.warn(
            f"n_th = {params.n_th:.3g} exceeds n_max/10 = {limit:.3g}; "
            "thermal tails may be cut by the truncation",
            TruncationWarning,
            stacklevel=2,
        )
    h = build_hamiltonian(params, basis).data
    dim = basis.dim
    eye = sp.identity(dim, dtype=complex, format="csr")
    hs = sp.csr_matrix(h)
    lmat = -1j * (sp.kron(eye, hs) - sp.kron(hs.T, eye))

    gamma, nth = params.gamma, params.n_th
    jumps = []
    for mode in (1, 2):
        b = annihilation(basis, mode).data
        bs = sp.csr_matrix(b)
        lmat = lmat + 0.5 * gamma * (nth + 1) * _dissipator(bs, eye)
        jumps.append(math.sqrt(gamma * (nth + 1)) * b)
        if nth > 0:
            bd = sp.csr_matrix(b.T)
            lmat = lmat + 0.5 * gamma * nth * _dissipator(bd, eye)
            jumps.append(math.sqrt(gamma * nth) * b.T)
    return Superoperator(basis, lmat.tocsr(), h, tuple(jumps))
