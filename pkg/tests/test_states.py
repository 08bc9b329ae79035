import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from echochain import states
from echochain.rng import substream

import oracles


def test_basis_state_examples():
    psi = states.basis_state(2, 0)
    assert np.array_equal(psi, [1, 0, 0, 0])
    psi = states.basis_state(3, 5)
    assert psi[5] == 1.0 and np.count_nonzero(psi) == 1
    for i in range(8):
        assert np.linalg.norm(states.basis_state(3, i)) == 1.0


def test_basis_state_range_checks():
    with pytest.raises(ValueError):
        states.basis_state(3, 8)
    with pytest.raises(ValueError):
        states.basis_state(3, -1)
    with pytest.raises(ValueError):
        states.basis_state(1, 0)


def test_gaussian_state_moments():
    # E[sum |x_i|^2] = 1, E[<psi|A|psi>] = Tr A / N for a fixed diagonal A
    L, n_draws = 6, 100_000
    rng = substream(11, "test-gaussian", 0)
    diag = substream(11, "test-gaussian-op", 0).uniform(-1.0, 1.0, 2**L)
    norms = np.empty(n_draws)
    expect = np.empty(n_draws)
    for i in range(n_draws):
        psi = states.random_gaussian_state(L, rng)
        norms[i] = np.vdot(psi, psi).real
        expect[i] = np.real(np.vdot(psi, diag * psi))
    assert abs(norms.mean() - 1.0) < 5e-3
    target = diag.mean()  # Tr A / N
    se = expect.std() / np.sqrt(n_draws)
    assert abs(expect.mean() - target) < 4 * se


def test_gaussian_state_deterministic():
    a = states.random_gaussian_state(8, substream(5, "trace-state", 3))
    b = states.random_gaussian_state(8, substream(5, "trace-state", 3))
    assert np.array_equal(a, b)
    c = states.random_gaussian_state(8, substream(5, "trace-state", 4))
    assert not np.array_equal(a, c)


def test_ising_phase_examples():
    # all bonds aligned: 3 bonds of +1 -> exp(-3i J)
    psi = states.apply_ising_phase(states.basis_state(3, 0), 1.0)
    assert abs(psi[0] - np.exp(-3j)) < 1e-15
    # |001>: bond sum +1 -1 -1 = -1 -> exp(+i)
    psi = states.apply_ising_phase(states.basis_state(3, 1), 1.0)
    assert abs(psi[1] - np.exp(1j)) < 1e-15
    # L=2: the periodic sum counts the single bond twice
    psi = states.apply_ising_phase(states.basis_state(2, 0), 1.0)
    assert abs(psi[0] - np.exp(-2j)) < 1e-15


def test_kick_matrix_limits():
    assert np.array_equal(states.kick_matrix((0.0, 0.0, 0.0)), np.eye(2))
    u = states.kick_matrix((np.pi / 2, 0.0, 0.0))
    assert np.allclose(u, -1j * oracles.SX, atol=1e-15)


def test_kick_matrix_vs_expm():
    b = (1.4, 1.4, 0.0)
    h = b[0] * oracles.SX + b[1] * oracles.SY + b[2] * oracles.SZ
    assert np.max(np.abs(states.kick_matrix(b) - expm(-1j * h))) < 1e-14


@settings(max_examples=50, deadline=None)
@given(st.tuples(*[st.floats(-5, 5) for _ in range(3)]))
def test_kick_matrix_unitary(b):
    u = states.kick_matrix(b)
    assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-14


def test_uniform_kick_against_kron_oracle():
    rng = np.random.default_rng(3)
    for L in (2, 3, 4):
        b = tuple(rng.uniform(-2, 2, 3))
        dense = oracles.dense_kick(L, b)
        for psi in oracles.random_states(L, 25, seed=L):
            fast = states.apply_uniform_kick(psi, b)
            assert np.max(np.abs(fast - dense @ psi)) < 1e-13


def test_ising_phase_against_kron_oracle():
    for L in (2, 3, 4):
        dense = oracles.dense_ising(L, 0.7)
        for psi in oracles.random_states(L, 25, seed=10 + L):
            fast = states.apply_ising_phase(psi, 0.7)
            assert np.max(np.abs(fast - dense @ psi)) < 1e-13


def test_x_rotation_consistency():
    psi = states.random_gaussian_state(6, substream(1, "t", 0))
    a = states.apply_x_rotation_all(psi, 0.3)
    b = states.apply_uniform_kick(psi, (0.3, 0.0, 0.0))
    assert np.array_equal(a, b)
    assert np.array_equal(states.apply_x_rotation_all(psi, 0.0), psi)


def test_x_rotation_half_pi_is_global_flip():
    # delta=pi/2: each site gets -i sigma^x, so |i> -> (-i)^L |~i>;
    # a full delta=pi rotation is the scalar (-1)^L
    L = 4
    psi = states.basis_state(L, 0b0110)
    out = states.apply_x_rotation_all(psi, np.pi / 2)
    assert abs(out[0b1001] - (-1j) ** L) < 1e-14
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-14)
    full = states.apply_x_rotation_all(psi, np.pi)
    assert np.max(np.abs(full - (-1.0) ** L * psi)) < 1e-13


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 8), st.tuples(*[st.floats(-3, 3) for _ in range(3)]), st.floats(0, 3))
def test_norm_preservation(L, b, J):
    psi = states.random_gaussian_state(L, substream(9, "prop", L))
    n0 = np.linalg.norm(psi)
    out = states.apply_uniform_kick(states.apply_ising_phase(psi, J), b)
    assert abs(np.linalg.norm(out) - n0) < 1e-13


def test_diagonal_kernels_commute():
    psi = states.random_gaussian_state(7, substream(4, "t", 1))
    bz = (0.0, 0.0, 0.9)
    a = states.apply_uniform_kick(states.apply_ising_phase(psi, 1.1), bz)
    b = states.apply_ising_phase(states.apply_uniform_kick(psi, bz), 1.1)
    assert np.max(np.abs(a - b)) < 1e-15


def test_inner_product():
    a = states.basis_state(2, 1)
    b = states.basis_state(2, 2)
    assert states.inner_product(a, b) == 0
    assert states.inner_product(a, a) == 1
    v = np.array([1, 1j, 0, 0]) / np.sqrt(2)
    w = np.array([1, -1j, 0, 0]) / np.sqrt(2)
    # (1*1 + (-i)(-i))/2 = 0
    assert abs(states.inner_product(v, w)) < 1e-15
    psi = states.random_gaussian_state(5, substream(2, "t", 0))
    assert states.inner_product(psi, psi).real >= 0
    assert abs(states.inner_product(psi, psi).imag) < 1e-15
    with pytest.raises(ValueError):
        states.inner_product(a, states.basis_state(3, 0))


def test_sum_sigma_x_against_oracle():
    L = 4
    dense = oracles.dense_sum_sigma_x(L)
    for psi in oracles.random_states(L, 10, seed=77):
        fast = states.apply_sum_sigma_x(psi)
        assert np.max(np.abs(fast - dense @ psi)) < 1e-13


def test_out_aliasing_matches_pure():
    psi = states.random_gaussian_state(6, substream(8, "t", 0))
    pure = states.apply_uniform_kick(psi, (0.5, 0.2, 0.1))
    inplace = psi.copy()
    states.apply_uniform_kick(inplace, (0.5, 0.2, 0.1), out=inplace)
    assert np.array_equal(pure, inplace)
