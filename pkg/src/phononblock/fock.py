"""Truncated two-mode Fock space and its elementary ladder operators.

Basis states |m, n> (m phonons in mode 1, n in mode 2) are flattened
row-major with mode 1 as the slow axis::

    index(m, n) = m * (n2_max + 1) + n

Every matrix in the package uses this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FockBasis",
    "Operator",
    "DensityMatrix",
    "make_basis",
    "annihilation",
    "creation",
    "number_operator",
    "identity",
    "vacuum_density",
    "product_density",
]

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True)
class FockBasis:
    n1_max: int
    n2_max: int

    def __post_init__(self):
        for name in ("n1_max", "n2_max"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def dims(self) -> tuple[int, int]:
        return self.n1_max + 1, self.n2_max + 1

    @property
    def dim(self) -> int:
        return (self.n1_max + 1) * (self.n2_max + 1)

    def index(self, m: int, n: int) -> int:
        if not (0 <= m <= self.n1_max and 0 <= n <= self.n2_max):
            raise IndexError(f"|{m},{n}> is outside the truncated basis")
        return m * (self.n2_max + 1) + n

    def unindex(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.dim:
            raise IndexError(f"flat index {i} out of range")
        return divmod(int(i), self.n2_max + 1)

    def occupations(self, mode: int) -> np.ndarray:
        """Occupation number of `mode` for every flat index."""
        _check_mode(mode)
        m, n = np.divmod(np.arange(self.dim), self.n2_max + 1)
        return (m if mode == 1 else n).astype(float)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix on a :class:`FockBasis`. Read-only after creation."""

    basis: FockBasis
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if data.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"matrix shape {data.shape} does not match basis dim {self.basis.dim}"
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def dag(self) -> Operator:
        return Operator(self.basis, self.data.conj().T)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def expect(self, other: Operator | np.ndarray) -> complex:
        """Tr(other @ self)."""
        other = np.asarray(other)
        # Tr(AB) without forming the product
        return complex(np.sum(other.T * self.data))

    def _wrap(self, data):
        return Operator(self.basis, data)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return self._wrap(self.data @ other.data)
        return self.data @ other

    def __add__(self, other):
        return self._wrap(self.data + np.asarray(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.data - np.asarray(other))

    def __neg__(self):
        return self._wrap(-self.data)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return self._wrap(scalar * self.data)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._wrap(self.data / scalar)


@dataclass(frozen=True, eq=False)
class DensityMatrix(Operator):
    """A state on the truncated space.

    Construction does not enforce the physical invariants, because some
    code paths carry intermediate matrices; call :meth:`check` (or use
    :meth:`violations`) where a physical state is required.
    """

    def violations(self) -> list[str]:
        rho = self.data
        problems = []
        herm = np.max(np.abs(rho - rho.conj().T)) if rho.size else 0.0
        if herm > HERMITIAN_TOL:
            problems.append(f"not Hermitian (max |rho - rho^+| = {herm:.3g})")
        tr = np.trace(rho)
        if abs(tr - 1) > TRACE_TOL:
            problems.append(f"trace {tr:.12g} != 1")
        lam = self.min_eigenvalue()
        if lam < -PSD_TOL:
            problems.append(f"smallest eigenvalue {lam:.3g} < -{PSD_TOL:g}")
        return problems

    def check(self) -> DensityMatrix:
        problems = self.violations()
        if problems:
            raise ValueError("invalid density matrix: " + "; ".join(problems))
        return self

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def _wrap(self, data):
        return Operator(self.basis, data)


def _check_mode(mode):
    if mode not in (1, 2):
        raise ValueError(f"mode must be 1 or 2, got {mode!r}")


def make_basis(n1_max: int = 10, n2_max: int = 10) -> FockBasis:
    return FockBasis(n1_max, n2_max)


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)


def annihilation(basis: FockBasis, mode: int) -> Operator:
    """<m-1, n| b1 |m, n> = sqrt(m); analogously for mode 2."""
    _check_mode(mode)
    d1, d2 = basis.dims
    if mode == 1:
        mat = np.kron(_ladder(basis.n1_max), np.eye(d2))
    else:
        mat = np.kron(np.eye(d1), _ladder(basis.n2_max))
    return Operator(basis, mat)


def creation(basis: FockBasis, mode: int) -> Operator:
    return annihilation(basis, mode).dag()


def number_operator(basis: FockBasis, mode: int) -> Operator:
    return Operator(basis, np.diag(basis.occupations(mode)))


def identity(basis: FockBasis) -> Operator:
    return Operator(basis, np.eye(basis.dim))


def vacuum_density(basis: FockBasis) -> DensityMatrix:
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    rho[0, 0] = 1.0
    return DensityMatrix(basis, rho)


def product_density(basis: FockBasis, rho1, rho2) -> DensityMatrix:
    """rho1 (mode 1) tensor rho2 (mode 2), given as single-mode matrices."""
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != (basis.dims[0],) * 2 or rho2.shape != (basis.dims[1],) * 2:
        raise ValueError("single-mode matrices do not match the basis truncation")
    return DensityMatrix(basis, np.kron(rho1, rho2))
