"""Dense state vectors and the elementary unitary kernels of the kicked chain.

A state over L spin-1/2 sites is a plain complex128 numpy array of length
2**L.  Site j corresponds to bit j of the basis index (least significant
bit = site 0), and the computational basis uses the convention
sigma^z |0> = +|0>, so bit value 0 means z = +1.  All kernels act
elementwise or per-site on the amplitude array; none of them builds a
matrix of dimension 2**L.

Every kernel is pure by default (returns a fresh array) and accepts an
``out`` argument which may alias the input for in-place updates inside
evolution loops.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = [
    "num_qubits",
    "basis_state",
    "random_gaussian_state",
    "ising_bond_sums",
    "apply_ising_phase",
    "kick_matrix",
    "apply_uniform_kick",
    "apply_x_rotation_all",
    "apply_sum_sigma_x",
    "inner_product",
]

MAX_QUBITS = 24


def num_qubits(state: np.ndarray) -> int:
    """Number of sites L for a state of length 2**L."""
    n = state.shape[0]
    L = n.bit_length() - 1
    if state.ndim != 1 or n != 1 << L or L < 1:
        raise ValueError(f"state length {n} is not a power of two >= 2")
    return L


def _check_L(L: int) -> None:
    if not 2 <= L <= MAX_QUBITS:
        raise ValueError(f"qubit count L={L} outside supported range [2, {MAX_QUBITS}]")


def basis_state(L: int, index: int) -> np.ndarray:
    """Unit vector |index> in the computational basis (bit j = site j)."""
    _check_L(L)
    if not 0 <= index < (1 << L):
        raise ValueError(f"basis index {index} out of range for L={L}")
    psi = np.zeros(1 << L, dtype=np.complex128)
    psi[index] = 1.0
    return psi


def random_gaussian_state(L: int, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian probe state with E[|x_i|^2] = 1/2**L.

    Real and imaginary parts of each amplitude are independent N(0, 1/(2N)).
    The state is deliberately *not* normalized: with this measure
    E[<psi|A|psi>] = Tr A / N holds exactly, which is what the stochastic
    trace estimator relies on.
    """
    _check_L(L)
    n = 1 << L
    parts = rng.standard_normal((2, n))
    return np.sqrt(0.5 / n) * (parts[0] + 1j * parts[1])


@lru_cache(maxsize=8)
def ising_bond_sums(L: int) -> np.ndarray:
    """Per-basis-state value of sum_j z_j z_{j+1 mod L} as an int8 array.

    For L = 2 the periodic sum counts the single physical bond twice
    (terms j=0 and j=1 both couple sites 0 and 1).
    """
    _check_L(L)
    idx = np.arange(1 << L, dtype=np.int64)
    mask = (1 << L) - 1
    rolled = ((idx << 1) | (idx >> (L - 1))) & mask
    flips = np.bitwise_count(idx ^ rolled).astype(np.int16)
    return (L - 2 * flips).astype(np.int8)


def ising_phase_vector(L: int, J: float) -> np.ndarray:
    """Diagonal of exp(-i J sum_j sigma^z_j sigma^z_{j+1}) over the basis."""
    return np.exp(-1j * J * ising_bond_sums(L).astype(np.float64))


def apply_ising_phase(state: np.ndarray, J: float, out: np.ndarray | None = None) -> np.ndarray:
    """Apply the nearest-neighbour Ising phase exp(-i J sum_j z_j z_{j+1})."""
    L = num_qubits(state)
    phases = ising_phase_vector(L, J)
    if out is None:
        return state * phases
    np.multiply(state, phases, out=out)
    return out


def kick_matrix(b) -> np.ndarray:
    """2x2 unitary exp(-i b.sigma) = cos|b| I - i sin|b| (bhat.sigma)."""
    bx, by, bz = (float(c) for c in b)
    theta = np.sqrt(bx * bx + by * by + bz * bz)
    if theta == 0.0:
        return np.eye(2, dtype=np.complex128)
    nx, ny, nz = bx / theta, by / theta, bz / theta
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [c - 1j * s * nz, -1j * s * (nx - 1j * ny)],
            [-1j * s * (nx + 1j * ny), c + 1j * s * nz],
        ],
        dtype=np.complex128,
    )


def _apply_matrix_all_sites(out: np.ndarray, u: np.ndarray, L: int) -> None:
    # One-site unitaries on every site commute; sweep sites in index order.
    for j in range(L):
        view = out.reshape(1 << (L - 1 - j), 2, 1 << j)
        a0 = view[:, 0, :]
        a1 = view[:, 1, :]
        new0 = u[0, 0] * a0
        new0 += u[0, 1] * a1
        a1 *= u[1, 1]
        a1 += u[1, 0] * a0
        a0[:] = new0


def apply_uniform_kick(state: np.ndarray, b, out: np.ndarray | None = None) -> np.ndarray:
    """Apply exp(-i b.sigma_j) to every site j (homogeneous field kick)."""
    L = num_qubits(state)
    u = kick_matrix(b)
    if out is None:
        out = state.copy()
    elif out is not state:
        np.copyto(out, state)
    _apply_matrix_all_sites(out, u, L)
    return out


def apply_x_rotation_all(state: np.ndarray, delta: float, out: np.ndarray | None = None) -> np.ndarray:
    """Apply exp(-i delta sigma^x_j) on every site; equals a (delta,0,0) kick."""
    return apply_uniform_kick(state, (float(delta), 0.0, 0.0), out=out)


def apply_sum_sigma_x(state: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
    """Apply the perturbation generator A = sum_j sigma^x_j (not unitary)."""
    L = num_qubits(state)
    if out is None or out is state:
        result = np.zeros_like(state)
    else:
        result = out
        result[:] = 0.0
    for j in range(L):
        src = state.reshape(1 << (L - 1 - j), 2, 1 << j)
        dst = result.reshape(1 << (L - 1 - j), 2, 1 << j)
        dst[:, 0, :] += src[:, 1, :]
        dst[:, 1, :] += src[:, 0, :]
    if out is state:
        np.copyto(out, result)
        return out
    return result


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b> = sum_i conj(a_i) b_i.

    Summation is numpy's pairwise reduction over the flat index, which is
    deterministic for a given array size independent of thread count.
    """
    if a.shape != b.shape:
        raise ValueError(f"state dimensions differ: {a.shape} vs {b.shape}")
    return complex(np.sum(np.conj(a) * b))
