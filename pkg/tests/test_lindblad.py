import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phononblock.errors import TruncationWarning
from phononblock.fock import annihilation, make_basis
from phononblock.lindblad import (
    Superoperator,
    SystemParams,
    Temperature,
    build_hamiltonian,
    build_liouvillian,
    thermal_occupancy,
    unvec,
    vec,
)

RNG = np.random.default_rng(7)


def random_hermitian(dim, rng=RNG):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def random_state(dim, rng=RNG):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# ---------------------------------------------------------------- params

def test_params_reject_per_mode_values():
    with pytest.raises(TypeError):
        SystemParams(0.3, 10, 0.01, 0.001, gamma=(1.0, 2.0))
    with pytest.raises(TypeError):
        SystemParams(0.3, 10, 0.01, 0.001, n_th=[0.1, 0.1])


@pytest.mark.parametrize("kw", [dict(gamma=0), dict(n_th=-0.1), dict(drive_f=-1),
                                dict(coupling_j=-2), dict(delta=math.inf)])
def test_params_validation(kw):
    base = dict(delta=0.3, coupling_j=10, kerr_u=0.01, drive_f=0.001)
    base.update(kw)
    with pytest.raises(ValueError):
        SystemParams(**base)


def test_delta_tilde_and_with():
    p = SystemParams(0.29, 10, 0.01, 0.001, gamma=2.0)
    assert p.delta_tilde == complex(0.29, -1.0)
    assert p.with_(kerr_u=0.5).kerr_u == 0.5
    assert p.with_temperature(0.04).n_th == pytest.approx(math.exp(-25) / (1 - math.exp(-25)))


# ---------------------------------------------------------------- thermal occupancy

def test_thermal_occupancy_zero_is_exact():
    assert thermal_occupancy(0) == 0.0
    assert thermal_occupancy(Temperature(0.0)) == 0.0


@pytest.mark.parametrize("t", [0.001, 0.02, 0.028, 0.04, 0.046, 0.1, 1.0, 10.0])
def test_thermal_occupancy_high_precision(t):
    mpmath.mp.dps = 50
    exact = 1 / (mpmath.exp(1 / mpmath.mpf(t)) - 1)
    assert thermal_occupancy(t) == pytest.approx(float(exact), rel=1e-14)


def test_thermal_occupancy_underflow_branch():
    # x = 1/t just above 700 takes the exp(-x) branch
    assert thermal_occupancy(1 / 705) == pytest.approx(math.exp(-705), rel=1e-12)
    assert thermal_occupancy(1e-4) == 0.0  # e^-10000 underflows to zero
    with pytest.raises(ValueError):
        thermal_occupancy(-0.1)
    with pytest.raises(ValueError):
        Temperature(-1)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 50), st.floats(1e-3, 50))
def test_thermal_occupancy_monotone(a, b):
    lo, hi = sorted((a, b))
    assert thermal_occupancy(lo) <= thermal_occupancy(hi)


# ---------------------------------------------------------------- hamiltonian

def test_hamiltonian_elements():
    basis = make_basis(3, 3)
    p = SystemParams(0.3, 2.0, 0.7, 0.05)
    h = build_hamiltonian(p, basis).data
    np.testing.assert_allclose(h, h.conj().T)
    # diagonal: Delta (m + n) + U n (n - 1)
    for m in range(4):
        for n in range(4):
            i = basis.index(m, n)
            assert h[i, i] == pytest.approx(0.3 * (m + n) + 0.7 * n * (n - 1))
    # hopping <1,0|H|0,1> = J, drive <1,0|H|0,0> = F
    assert h[basis.index(1, 0), basis.index(0, 1)] == pytest.approx(2.0)
    assert h[basis.index(2, 1), basis.index(1, 2)] == pytest.approx(2.0 * math.sqrt(2) * math.sqrt(2))
    assert h[basis.index(1, 0), basis.index(0, 0)] == pytest.approx(0.05)
    assert h[basis.index(0, 1), basis.index(0, 0)] == 0


# ---------------------------------------------------------------- vectorization

@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**31 - 1))
def test_vec_kron_identity(d, seed):
    rng = np.random.default_rng(seed)
    a, b, x = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(3))
    np.testing.assert_allclose(np.kron(b.T, a) @ vec(x), vec(a @ x @ b), atol=1e-12)
    np.testing.assert_array_equal(unvec(vec(x), d), x)


def _liouvillian_by_definition(p, basis, rho):
    # straight from the master equation, one dissipator per channel
    h = build_hamiltonian(p, basis).data
    out = -1j * (h @ rho - rho @ h)
    for mode in (1, 2):
        b = annihilation(basis, mode).data
        for op, rate in ((b, p.gamma * (p.n_th + 1)), (b.T, p.gamma * p.n_th)):
            od = op.conj().T
            out += 0.5 * rate * (2 * op @ rho @ od - od @ op @ rho - rho @ od @ op)
    return out


@pytest.mark.filterwarnings("ignore::phononblock.errors.TruncationWarning")
@pytest.mark.parametrize("n_th", [0.0, 0.3])
def test_liouvillian_matches_master_equation(n_th):
    basis = make_basis(3, 2)
    p = SystemParams(0.3, 1.7, 0.4, 0.2, gamma=1.3, n_th=n_th)
    liou = build_liouvillian(p, basis)
    rho = random_state(basis.dim)
    expected = _liouvillian_by_definition(p, basis, rho)
    np.testing.assert_allclose(unvec(liou @ vec(rho), basis.dim), expected, atol=1e-12)
    np.testing.assert_allclose(liou.apply(rho), expected, atol=1e-12)
    assert liou.shape == (basis.dim**2,) * 2


def test_scaled_superoperator_keeps_generator():
    basis = make_basis(2, 2)
    liou = build_liouvillian(SystemParams(0.3, 1.0, 0.2, 0.1, n_th=0.1), basis)
    rho = random_state(basis.dim)
    scaled = 2.5 * liou
    assert scaled.has_generator
    np.testing.assert_allclose(scaled.apply(rho), 2.5 * liou.apply(rho), atol=1e-12)
    plain = Superoperator(basis, liou.matrix)
    np.testing.assert_allclose(plain.apply(rho), liou.apply(rho), atol=1e-12)
    assert not (1j * liou).has_generator


# ---------------------------------------------------------------- CPTP structure

@pytest.mark.filterwarnings("ignore::phononblock.errors.TruncationWarning")
@pytest.mark.parametrize("n_th", [0.0, 0.5])
def test_trace_preservation(n_th):
    basis = make_basis(4, 4)
    liou = build_liouvillian(SystemParams(0.29, 5, 0.3, 0.4, n_th=n_th), basis)
    trace_functional = vec(np.eye(basis.dim))
    assert np.max(np.abs(liou.matrix.T @ trace_functional)) < 1e-12


def test_hermiticity_preservation():
    basis = make_basis(4, 4)
    liou = build_liouvillian(SystemParams(0.29, 5, 0.3, 0.4, n_th=0.2), basis)
    x = random_hermitian(basis.dim)
    out = liou.apply(x)
    np.testing.assert_allclose(out, out.conj().T, atol=1e-12)


@pytest.mark.parametrize("n_th", [0.0, 0.2])
def test_dissipativity(n_th):
    basis = make_basis(3, 3)
    liou = build_liouvillian(SystemParams(0.29, 3, 0.5, 0.3, n_th=n_th), basis)
    eig = np.linalg.eigvals(liou.toarray())
    assert np.max(eig.real) < 1e-10
    # exactly one stationary mode
    assert np.sum(np.abs(eig) < 1e-9) == 1


def test_truncation_guard_warns():
    basis = make_basis(5, 5)
    with pytest.warns(TruncationWarning):
        build_liouvillian(SystemParams(0.3, 1, 0.1, 0.1, n_th=0.6), basis)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_liouvillian(SystemParams(0.3, 1, 0.1, 0.1, n_th=0.4), basis)
