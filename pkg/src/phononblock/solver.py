"""Steady states and time propagation for a :class:`Superoperator`.

The stationary state is the trace-one null vector of L.  The primary
route replaces one row of L by the trace functional and solves the
resulting non-singular system.  When the Liouvillian carries its
generator (Hamiltonian plus jump operators) that solve runs matrix-free:
GMRES right-preconditioned by the exact inverse of the jump-free part
``rho -> A rho + rho A^+`` (a Sylvester equation, solved through one
Schur factorization of A), followed by iterative refinement that runs
until the low-order moments stop changing.  Refinement matters here: at weak drive the two-phonon
populations sit twenty or more orders of magnitude below the vacuum
population, and a single solve only resolves them to ~1e-16 absolute.
Residuals of L are computed from local matrix products, so they stay
accurate relative to each element's own scale and refinement recovers
the small elements, though each round gains only a modest factor.

The fallback is the eigenvector of L with the smallest-magnitude
eigenvalue (shift-invert ARPACK on the sparse matrix).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.linalg.lapack import ztrsyl

from .errors import IntegrationFailure, NonPositive, NoSteadyState
from .fock import DensityMatrix, Operator
from .lindblad import Superoperator, unvec, vec

__all__ = [
    "SteadyStateReport",
    "Propagation",
    "steady_state",
    "propagate",
    "residual",
    "excitation_weights",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
NONPOSITIVE_TOL = 1e-6
TRACE_REPLACEMENT = "trace-replacement solve"
SMALLEST_EIGENPAIR = "smallest-eigenpair"


@dataclass(frozen=True)
class SteadyStateReport:
    rho: DensityMatrix
    residual: float
    method: str
    hermitization_delta: float
    trace_correction: float = 0.0
    replaced_row: int | None = None
    notes: tuple[str, ...] = ()


def residual(liouvillian: Superoperator, rho) -> float:
    """Two-norm of L vec(rho)."""
    rho = np.asarray(rho)
    if rho.shape != (liouvillian.dim, liouvillian.dim):
        raise ValueError("density matrix does not match the Liouvillian basis")
    return float(np.linalg.norm(liouvillian.matrix @ vec(rho)))


def _trace_positions(dim: int) -> np.ndarray:
    return np.arange(dim) * (dim + 1)


def _replaced_row(liouvillian: Superoperator) -> int:
    # The vacuum-population equation.  Replacing the row with the largest
    # diagonal (the most strongly damped, highest Fock corner) leaves a
    # system that GMRES converges on slowly and that loses the small
    # two-phonon populations at weak drive.
    return 0


class _SylvesterPreconditioner:
    """Exact inverse of rho -> A rho + rho A^+ (optionally shifted)."""

    def __init__(self, a: np.ndarray, gamma_scale: float):
        t, q = sla.schur(a, output="complex")
        # A is dissipative; at T=0 and F=0 its vacuum eigenvalue is 0 and
        # the Sylvester operator is singular.  Shift only in that case.
        margin = float(np.min(-2.0 * np.real(np.diag(t))))
        floor = 1e-2 * gamma_scale
        self.shift = max(0.0, floor - margin)
        if self.shift:
            t = t - 0.5 * self.shift * np.eye(len(t))
        self.t = t
        self.q = q
        self.qh = q.conj().T

    def __call__(self, y: np.ndarray) -> np.ndarray:
        c = self.qh @ y @ self.q
        x, scale, info = ztrsyl(self.t, self.t, c, trana="N", tranb="C")
        if info < 0:
            raise RuntimeError(f"ztrsyl argument error {info}")
        return self.q @ (x / scale) @ self.qh


def _solve_generator(
    liouvillian: Superoperator,
    row: int,
    refine: int,
    gmres_rtol: float,
    max_refine: int,
    settle: float,
) -> tuple[np.ndarray, list[str]]:
    dim = liouvillian.dim
    a = liouvillian.effective_generator()
    gamma_scale = max(float(np.max(np.abs(np.diag(a).real))), 1e-300)
    precond = _SylvesterPreconditioner(a, gamma_scale)
    # every generator piece is a sparse ladder product
    a_s = sp.csr_matrix(a)
    ah_t = sp.csr_matrix(a.conj())  # (x @ A^+) == (conj(A) @ x.T).T
    jumps = [(sp.csr_matrix(c), sp.csr_matrix(c.conj())) for c in liouvillian.jumps]
    ri, rj = row % dim, row // dim

    def lmod(x: np.ndarray) -> np.ndarray:
        out = a_s @ x + (ah_t @ x.T).T
        for c, cc in jumps:
            out += (cc @ (c @ x).T).T
        out[ri, rj] = np.trace(x)
        return out

    def matvec(v):
        return vec(lmod(precond(unvec(v, dim)))).copy()

    op = spla.LinearOperator((dim * dim, dim * dim), matvec=matvec, dtype=complex)
    notes = []

    def solve(rhs: np.ndarray) -> np.ndarray:
        y, info = spla.gmres(
            op, vec(rhs), rtol=gmres_rtol, atol=0.0, restart=80, maxiter=6
        )
        if info != 0:
            notes.append(f"gmres info={info}")
        return precond(unvec(y, dim))

    target = np.zeros((dim, dim), dtype=complex)
    target[ri, rj] = 1.0
    x = solve(target)
    for _ in range(refine):
        r = target - lmod(x)
        x = x + solve(r)
    # Each round gains a roughly fixed factor on the smallest populations,
    # so weak drive needs more rounds.  Continue until the first two
    # factorial moments of both modes (what g2 is built from) settle.
    occ = [liouvillian.basis.occupations(m) for m in (1, 2)]
    weights = np.array([w for n in occ for w in (n, n * (n - 1))], dtype=float)

    def moments(y):
        return weights @ np.real(np.diag(y))

    before = moments(x)
    for _ in range(max_refine - refine):
        x = x + solve(target - lmod(x))
        after = moments(x)
        scale = np.maximum(np.abs(after), np.finfo(float).tiny)
        if np.max(np.abs(after - before) / scale) < settle:
            break
        before = after
    else:
        notes.append(f"moments still moving after {max_refine} refinements")
    return x, notes


def _solve_sparse(liouvillian: Superoperator, row: int) -> np.ndarray:
    dim = liouvillian.dim
    n = dim * dim
    mat = liouvillian.matrix.tocsr(copy=True).astype(complex)
    start, stop = mat.indptr[row], mat.indptr[row + 1]
    mat.data[start:stop] = 0.0
    trace_row = sp.csr_matrix(
        (np.ones(dim), (np.full(dim, row), _trace_positions(dim))), shape=(n, n)
    )
    mat = (mat + trace_row).tocsc()
    mat.eliminate_zeros()
    rhs = np.zeros(n, dtype=complex)
    rhs[row] = 1.0
    return unvec(spla.splu(mat).solve(rhs), dim)


def _smallest_eigenpair(liouvillian: Superoperator) -> np.ndarray:
    dim = liouvillian.dim
    mat = liouvillian.matrix.tocsc().astype(complex)
    n = mat.shape[0]
    if n <= 400:
        vals, vecs = sla.eig(mat.toarray())
        v = vecs[:, np.argmin(np.abs(vals))]
    else:
        # small non-zero shift keeps the LU factorization non-singular
        v0 = np.zeros(n, dtype=complex)
        v0[_trace_positions(dim)] = 1.0
        vals, vecs = spla.eigs(mat, k=1, sigma=-1e-7, which="LM", v0=v0)
        v = vecs[:, 0]
    rho = unvec(v, dim)
    return rho / np.trace(rho)


def _finish(rho: np.ndarray) -> tuple[np.ndarray, float, float]:
    anti = 0.5 * (rho - rho.conj().T)
    herm_delta = float(np.linalg.norm(anti))
    rho = rho - anti
    tr = float(np.real(np.trace(rho)))
    return rho / tr, herm_delta, abs(tr - 1.0)


def steady_state(
    liouvillian: Superoperator,
    *,
    method: str = "auto",
    tol: float = RESIDUAL_TOL,
    refine: int = 1,
    gmres_rtol: float = 1e-12,
    max_refine: int = 40,
    settle: float = 1e-4,
) -> SteadyStateReport:
    """Stationary state of ``liouvillian``.

    ``method`` is ``"auto"`` (trace replacement, falling back to the
    eigenvector), ``"trace"`` or ``"eigen"``.  Raises
    :class:`NoSteadyState` when the residual stays above ``tol`` and
    :class:`NonPositive` when the state has an eigenvalue below -1e-6.

    The generator path refines at least ``refine`` times and at most
    ``max_refine`` times, stopping once the first two factorial moments
    of both modes change by less than ``settle`` (relative) per round.
    """
    if method not in ("auto", "trace", "eigen"):
        raise ValueError(f"unknown method {method!r}")
    basis = liouvillian.basis
    attempts = []
    row = _replaced_row(liouvillian)

    if method in ("auto", "trace"):
        notes: list[str] = []
        try:
            if liouvillian.has_generator:
                raw, notes = _solve_generator(
                    liouvillian, row, refine, gmres_rtol, max_refine, settle
                )
            else:
                raw = _solve_sparse(liouvillian, row)
            if not np.all(np.isfinite(raw)):
                raise FloatingPointError("non-finite solution")
            rho, herm, trc = _finish(raw)
            res = residual(liouvillian, rho)
            attempts.append((TRACE_REPLACEMENT, rho, res, herm, trc, row, tuple(notes)))
        except (FloatingPointError, RuntimeError, np.linalg.LinAlgError) as exc:
            log.warning("trace-replacement solve failed: %s", exc)
            attempts.append((TRACE_REPLACEMENT, None, np.inf, 0.0, 0.0, row, (str(exc),)))

    if method == "eigen" or (method == "auto" and not attempts[-1][2] <= tol):
        if attempts:
            log.info("falling back to smallest eigenpair (residual %.3g)", attempts[-1][2])
        raw = _smallest_eigenpair(liouvillian)
        rho, herm, trc = _finish(raw)
        res = residual(liouvillian, rho)
        attempts.append((SMALLEST_EIGENPAIR, rho, res, herm, trc, None, ()))

    name, rho, res, herm, trc, used_row, notes = min(attempts, key=lambda a: a[2])
    if rho is None or not res <= tol:
        raise NoSteadyState(f"best residual {res:.3g} exceeds {tol:.1g}")
    dm = DensityMatrix(basis, rho)
    lam = dm.min_eigenvalue()
    if lam < -NONPOSITIVE_TOL:
        raise NonPositive(
            f"steady state has eigenvalue {lam:.3g}; enlarge the truncation"
        )
    return SteadyStateReport(dm, res, name, herm, trc, used_row, notes)


def excitation_weights(basis, scale) -> np.ndarray:
    """Per-state weights eps1**m * eps2**n used to balance tiny amplitudes."""
    eps1, eps2 = scale
    return eps1 ** basis.occupations(1) * eps2 ** basis.occupations(2)


@dataclass(frozen=True)
class Propagation:
    """Sampled trajectory; iterating yields ``(time, state)`` pairs."""

    times: np.ndarray
    states: list = field(repr=False)
    trace_deviation: np.ndarray = field(repr=False)
    hermitization_delta: np.ndarray = field(repr=False)

    def __iter__(self):
        return iter(zip(self.times, self.states))

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return self.times[i], self.states[i]


def _integrate(
    liouvillian: Superoperator,
    mat0: np.ndarray,
    times: np.ndarray,
    rtol: float,
    atol: float,
    excitation_scale=None,
) -> list[np.ndarray]:
    dim = liouvillian.dim
    lmat = liouvillian.matrix.tocsr()
    y0 = vec(np.asarray(mat0, dtype=complex)).copy()
    s = None
    if excitation_scale is not None:
        w = excitation_weights(liouvillian.basis, excitation_scale)
        s = vec(np.outer(w, w)).real
        if np.min(s) < 1e-280:
            raise ValueError("excitation scale too small for this truncation")
        lmat = (sp.diags(1.0 / s) @ lmat @ sp.diags(s)).tocsr()
        y0 = y0 / s

    times = np.asarray(times, dtype=float)
    t_end = float(times[-1])
    if t_end == 0.0:
        ys = np.repeat(y0[:, None], len(times), axis=1)
    else:
        sol = solve_ivp(
            lambda t, y: lmat @ y,
            (0.0, t_end),
            y0,
            method="DOP853",
            t_eval=times,
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise IntegrationFailure(sol.message)
        ys = sol.y
    if s is not None:
        ys = ys * s[:, None]
    return [unvec(ys[:, i], dim).copy() for i in range(ys.shape[1])]


def propagate(
    liouvillian: Superoperator,
    rho0,
    t_final: float | None,
    n_samples: int | None,
    *,
    times=None,
    renormalize: bool = True,
    rtol: float = 1e-9,
    atol: float = 1e-11,
    excitation_scale=None,
) -> Propagation:
    """Integrate d vec(rho)/dt = L vec(rho) with an adaptive explicit scheme.

    Samples are taken at ``n_samples`` uniformly spaced times in
    ``[0, t_final]``, or at the explicit sorted ``times`` (starting the
    integration at 0) when those are given instead.  With ``renormalize``
    each sample is Hermitized and divided by its trace, and the size of
    both corrections is recorded; without it the raw matrices are
    returned, which is what regression formulas need for seeds that are
    not states.

    ``excitation_scale=(eps1, eps2)`` integrates in the rescaled basis
    rho_ij / (w_i w_j), w = eps1**m * eps2**n, so that tolerances act on
    the relative size of weakly populated elements.
    """
    if times is None:
        if t_final is None or not t_final > 0:
            raise ValueError("t_final must be positive")
        if n_samples is None or n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        times = np.linspace(0.0, float(t_final), int(n_samples))
    else:
        times = np.asarray(times, dtype=float)
        if times[0] < 0 or np.any(np.diff(times) < 0):
            raise ValueError("times must be sorted and non-negative")
    mat0 = np.asarray(rho0)
    raw = _integrate(liouvillian, mat0, times, rtol, atol, excitation_scale)
    tr0 = np.trace(mat0)
    states, tr_dev, herm = [], [], []
    for m in raw:
        tr_dev.append(abs(np.trace(m) - tr0))
        if renormalize:
            rho, h, _ = _finish(m)
            herm.append(h)
            states.append(DensityMatrix(liouvillian.basis, rho))
        else:
            herm.append(0.0)
            states.append(Operator(liouvillian.basis, m))
    return Propagation(times, states, np.array(tr_dev), np.array(herm))
